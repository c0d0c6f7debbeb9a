#!/usr/bin/env python3
"""
重みクラス定数の細分化表を出力するスクリプト
べき重み |x|^a について N ごとの A_1 / A_p / A_∞ 代理の定数と判定を表にする

使い方:
    python scripts/refinement_table.py --exponent -0.5 --cells 64 128 256
    python scripts/refinement_table.py --exponent -1 --allow-nonintegrable
"""

import argparse
import logging
import os
import sys

# プロジェクトのルートディレクトリをパスに追加
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.function import PowerFamily
from models.lattice import CubeFamily
from services.stability_service import StabilityAssessor, refinement_grids
from services.weight_service import a1_constant, ainf_proxy, ap_constant, sample, stable_constant_verdict

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
)
logger = logging.getLogger(__name__)


def main():
    parser = argparse.ArgumentParser(description="重みクラス定数の細分化表")
    parser.add_argument("--exponent", type=float, required=True, help="べき重み |x|^a の a")
    parser.add_argument("--dim", type=int, default=1)
    parser.add_argument("--half-width", type=float, default=1.0)
    parser.add_argument("--cells", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--family", choices=[f.value for f in CubeFamily], default=CubeFamily.ALL_CUBES.value)
    parser.add_argument("--p", type=float, default=2.0, help="A_p の p")
    parser.add_argument("--allow-nonintegrable", action="store_true")
    args = parser.parse_args()

    family = CubeFamily(args.family)
    weight = PowerFamily(exponent=args.exponent, allow_nonintegrable=args.allow_nonintegrable)
    grids = refinement_grids(args.dim, args.half_width, args.cells)
    assessor = StabilityAssessor()

    columns = {"A1": [], f"A{args.p:g}": [], "Ainf": []}
    for grid in grids:
        w = sample(weight, grid)
        columns["A1"].append(a1_constant(w, family))
        columns[f"A{args.p:g}"].append(ap_constant(w, args.p, family))
        columns["Ainf"].append(ainf_proxy(w, family))

    print(f"|x|^{args.exponent:g}  (n={args.dim}, R={args.half_width:g}, family={family.value})")
    print("N".rjust(8) + "".join(name.rjust(14) for name in columns))
    for i, grid in enumerate(grids):
        print(str(grid.cells_per_axis).rjust(8) + "".join(f"{reports[i].constant:14.6f}" for reports in columns.values()))
    print("verdict".rjust(8) + "".join(stable_constant_verdict(r, assessor).value.rjust(14) for r in columns.values()))
    logger.info("細分化表の出力が完了しました")


if __name__ == "__main__":
    main()
