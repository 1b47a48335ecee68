"""Codeword lengths and rates of every construction over a range of k.

    python3 scripts/length_table.py
"""
import math

from randldc.ldc_edit import EditFlexParams, EditLdcParams
from randldc.ldc_hamming import FlexibleParams, HammingLdcParams


def main() -> None:
    print("k,ham-sr,ham-obl,ham-flex-sr,ham-flex-obl,edit-sr,edit-obl,edit-flex-sr,edit-flex-obl,ham-flex/(k log k)")
    for e in range(6, 13):
        k = 1 << e
        p = HammingLdcParams(k, 0.1)
        ham = [p.length(m) for m in ("shared", "oblivious")]
        flex = FlexibleParams(k).n
        flex_obl = FlexibleParams(k, model="oblivious").n
        edit = [EditLdcParams(k, 0.1, m).n for m in ("shared", "oblivious")]
        eflex = [EditFlexParams(k, m).n for m in ("shared", "oblivious")] if k <= 256 else ["", ""]
        row = [k, *ham, flex, flex_obl, *edit, *eflex, f"{flex / (k * math.log2(k)):.2f}"]
        print(",".join(map(str, row)))


if __name__ == "__main__":
    main()
