"""
Run the four Table-1 presets end to end and compare with the published rows.

Full-size runs (10^5 samples, 100-1000 resamples) take hours; --quick uses
20 000 samples and 20 resamples for a first look.
"""
import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.evaluation.table1 import summarize_table, unexpected_failures
from src.pipeline.presets import TABLE1_ROWS, get_preset_description
from src.pipeline.run import reproduce_table1

QUICK_SAMPLES = 20_000
QUICK_RESAMPLES = 20


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).parent.parent / "results" / "table1")
    parser.add_argument("--quick", action="store_true", help="small samples and resamples")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--verbose", "-v", action="store_true")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s - %(levelname)s - %(message)s")

    print("=" * 70)
    print("CSS Reconstruction - Table 1 Reproduction")
    print("=" * 70)

    print("\n1. Presets:")
    for preset, row in TABLE1_ROWS.items():
        print(f"   {row:6} {get_preset_description(preset)}")

    samples = QUICK_SAMPLES if args.quick else None
    resamples = QUICK_RESAMPLES if args.quick else None
    mode = f"quick ({QUICK_SAMPLES:,} samples, {QUICK_RESAMPLES} resamples)" if args.quick else "full size"
    print(f"\n2. Running forward model, sampling, MLE and bootstrap ({mode})...")
    print("   This may take a long time for full-size runs...")
    table = reproduce_table1(args.out, samples=samples, resamples=resamples, seed=args.seed,
                             workers=args.workers, progress=args.verbose)
    print(f"   ✓ Artifacts written to {args.out}")

    print("\n3. Published / model:")
    metrics = table[(table["row"] != "remark") & (table["metric"] != "report_consistency")]
    print(summarize_table(metrics))

    remark = table[table["row"] == "remark"].iloc[0]
    print(f"\n   Two-photon herald rate TES / APD: {remark['model']:.2f} "
          f"(reported about {remark['published']:.0f}; depends on the assumed APD efficiency)")

    gaps = table[table["known_gap"].astype(bool) & ~table["passed"].astype(bool)]
    failed = unexpected_failures(table)
    print("\n" + "=" * 70)
    if failed.empty:
        print("✓ Every Table-1 check outside the known model gaps is within tolerance")
    else:
        print(f"✗ {len(failed)} checks outside tolerance:")
        for _, line in failed.iterrows():
            print(f"   {line['row']:6} {line['metric']:18} published {line['published']:.3f}  "
                  f"model {line['model']:.3f}  tol {line['tolerance']:.3f}")
    if not gaps.empty:
        print(f"~ {len(gaps)} known model gaps (three-photon parity, see DESIGN.md):")
        for _, line in gaps.iterrows():
            print(f"   {line['row']:6} {line['metric']:18} published {line['published']:.3f}  "
                  f"model {line['model']:.3f}")
    print("=" * 70)
    print(f"\nComparison table: {args.out / 'table1.csv'}")
    return 0 if failed.empty else 1


if __name__ == "__main__":
    sys.exit(main())
