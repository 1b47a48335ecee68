"""Recall and window usage of corrupted-list search under edit adversaries.

    python3 scripts/list_search_recall.py --k 256 --trials 500
"""
import argparse

import numpy as np

from randldc.bitcore import RandomStream
from randldc.channel_sim import EDIT_STRATEGIES, AdversaryContext, budget_for, corrupt
from randldc.ldc_edit import BlockLayout
from randldc.list_search import Found, search, window_budget


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=256)
    ap.add_argument("--header", type=int, default=8)
    ap.add_argument("--payload", type=int, default=4)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--deltas", default="0.005,0.01,0.02,0.04")
    args = ap.parse_args()

    lay = BlockLayout(args.k, args.header, args.payload)
    print(f"block_len={lay.block_len} window_budget={window_budget(args.k)}")
    print("strategy,delta,recall,mean_windows,max_windows")
    for name, strategy in EDIT_STRATEGIES.items():
        for delta in (float(d) for d in args.deltas.split(",")):
            hits, windows = 0, []
            for t in range(args.trials):
                rs = RandomStream(t, ("recall", name, delta))
                payload = rs.derive("payload").bounded(np.full(args.k, 1 << args.payload))
                word = lay.emit(payload)
                ctx = AdversaryContext("oblivious", "edit", word.length, budget_for(delta, word.length),
                                       block_len=lay.block_len)
                view = lay.view(corrupt(word, strategy, ctx, rs.derive("adv")))
                target = rs.derive("target").randbelow(args.k)
                res = search(view, target, rs.derive("search"), delta_budget=delta)
                hits += isinstance(res, Found) and res.payload.to_int() == payload[target]
                windows.append(view.windows)
            print(f"{name},{delta},{hits / args.trials:.4f},{np.mean(windows):.1f},{max(windows)}")


if __name__ == "__main__":
    main()
