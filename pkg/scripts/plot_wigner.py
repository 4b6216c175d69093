"""Render an exported Wigner grid (and optionally the state's populations) to PNG."""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.visualization.wigner_plots import (plot_fock_populations, plot_wigner_grid,
                                            use_headless_backend)

use_headless_backend()

import matplotlib.pyplot as plt  # noqa: E402

from src.pipeline.io import load_state, load_wigner_grid  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("grid", type=Path, help="wigner.csv written by the pipeline")
    parser.add_argument("--state", type=Path, help="state JSON for a population chart")
    parser.add_argument("--ideal", type=Path, help="second state JSON drawn next to --state")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: next to grid)")
    args = parser.parse_args()

    output_dir = args.out or args.grid.parent
    output_dir.mkdir(parents=True, exist_ok=True)

    print("=" * 70)
    print("Wigner Function Plots")
    print("=" * 70)

    print(f"\n1. Loading {args.grid}...")
    values, grid, digest = load_wigner_grid(args.grid)
    print(f"   ✓ {grid.n_p}x{grid.n_q} grid, state digest {digest[:16]}")

    print("\n2. Creating Wigner contour plot...")
    fig = plot_wigner_grid(values, grid, title=args.grid.stem)
    target = output_dir / f"{args.grid.stem}.png"
    fig.savefig(target, dpi=300, bbox_inches="tight")
    plt.close(fig)
    print(f"   ✓ Saved to {target}")

    if args.state is not None:
        print("\n3. Creating photon-number chart...")
        rho = load_state(args.state)
        ideal = load_state(args.ideal) if args.ideal is not None else None
        fig = plot_fock_populations(rho, ideal, max_n=15)
        target = output_dir / f"{args.state.stem}_populations.png"
        fig.savefig(target, dpi=300, bbox_inches="tight")
        plt.close(fig)
        print(f"   ✓ Saved to {target}")

    print("\n" + "=" * 70)
    print("✓ Plots created!")
    print("=" * 70 + "\n")


if __name__ == "__main__":
    main()
