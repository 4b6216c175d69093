"""
Simulate every preset and save its homodyne dataset and forward state.
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.fock.functionals import mean_photon
from src.homodyne.dataset import save_dataset
from src.homodyne.sampling import sample_quadratures
from src.pipeline.config import save_config, with_overrides
from src.pipeline.io import save_state
from src.pipeline.presets import Preset, get_preset_config, get_preset_description
from src.pipeline.run import simulate_forward


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).parent.parent / "data" / "datasets")
    parser.add_argument("--samples", type=int, default=None, help="override every preset's sample count")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()

    print("=" * 70)
    print("Synthetic Homodyne Datasets")
    print("=" * 70)

    for i, preset in enumerate(Preset, start=1):
        config = with_overrides(get_preset_config(preset), seed=args.seed, samples=args.samples)
        run_dir = args.out / preset.value
        print(f"\n{i}. {preset.value}: {get_preset_description(preset)}")

        forward = simulate_forward(config)
        herald = f"{forward.herald_prob:.4g}" if forward.herald_prob is not None else "n/a"
        print(f"   ✓ Forward state: <n> = {mean_photon(forward.state):.3f}, herald probability {herald}")

        data = sample_quadratures(forward.state, config.gamma_h, config.schedule,
                                  config.n_samples, config.seed, config.label)
        save_config(config, run_dir / "config.json")
        save_state(forward.state, run_dir / "state_forward.json")
        path = save_dataset(data, run_dir / "dataset.csv")
        size_kb = path.stat().st_size / 1024
        print(f"   ✓ {len(data):,} samples saved to {path} ({size_kb:.0f} KB)")

    print("\n" + "=" * 70)
    print("Datasets ready.")
    print("=" * 70)
    print("\nNext: python scripts/css_cli.py reconstruct --preset <name> --data <dataset.csv>")


if __name__ == "__main__":
    main()
