"""Full Sp(8,2) left-coset CNOT-distance BFS, chunked for a 5 GB box."""
import time
import numpy as np
from scratch_bfs import (make_canon, make_gen_luts, apply_lut, pack_key,
                         in_sorted, sp_group_order)

N = 4
W = 2 * N
CHUNK = 6_000_000

canon = make_canon(N)
local_ops = [("H", q) for q in range(N)] + [("S", q) for q in range(N)]
cnot_ops = [("CNOT", c, t) for c in range(N) for t in range(N) if c != t]
local_luts = make_gen_luts(N, local_ops)
cnot_luts = make_gen_luts(N, cnot_ops)


def expand_unique(keys, luts):
    """unique(canon(keys @ g)) over g in luts, chunked."""
    parts = []
    for lut in luts:
        for lo in range(0, keys.size, CHUNK):
            img = canon(apply_lut(keys[lo:lo + CHUNK], lut, N))
            parts.append(np.unique(img))
            if sum(p.size for p in parts) > 4 * CHUNK:
                parts = [np.unique(np.concatenate(parts))]
    return np.unique(np.concatenate(parts))


def main():
    t0 = time.time()
    ident = np.array([pack_key(N, [1 << i for i in range(W)])], dtype=np.uint64)
    visited_blocks = []

    def in_visited(x):
        r = np.zeros(x.shape, dtype=bool)
        for b in visited_blocks:
            r |= in_sorted(x, b)
        return r

    def close0(seed):
        level = np.unique(seed)
        work = level
        while work.size:
            exp = expand_unique(work, local_luts)
            exp = exp[~in_sorted(exp, level)]
            exp = exp[~in_visited(exp)]
            if exp.size == 0:
                break
            level = np.union1d(level, exp)
            work = exp
        return level

    level = close0(canon(ident))
    sizes = []
    d = 0
    total = 0
    while level.size:
        visited_blocks.append(level)
        sizes.append(level.size)
        total += level.size
        print(f"dist {d}: {level.size:>12,} cosets  total {total:>12,}  "
              f"t={time.time()-t0:7.1f}s", flush=True)
        nxt = expand_unique(level, cnot_luts)
        nxt = nxt[~in_visited(nxt)]
        if nxt.size == 0:
            break
        level = close0(nxt)
        d += 1

    expect = sp_group_order(N) // 6**N
    print(f"found {total:,} cosets, expect {expect:,}")
    keys = np.concatenate(visited_blocks)
    dist = np.concatenate([np.full(b.size, i, dtype=np.uint8)
                           for i, b in enumerate(visited_blocks)])
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    dist = dist[order]
    np.save("/root/sp8_keys.npy", keys)
    np.save("/root/sp8_dist.npy", dist)
    print("histogram by coset:", sizes)
    print(f"saved, {time.time()-t0:.1f}s total")


if __name__ == "__main__":
    main()
