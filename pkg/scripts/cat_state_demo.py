import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.fock.constructors import css_state
from src.fock.functionals import mean_photon, purity
from src.fock.states import DensityMatrix, Parity
from src.phase_space.css_analysis import (distinguishability_p0, max_coherent_fidelity,
                                          min_alpha_for_distinguishability, nearest_css)
from src.phase_space.wigner import PhaseSpaceGrid, wigner_min
from src.pipeline.presets import TABLE1_ROWS, get_preset_config, get_preset_description
from src.pipeline.run import simulate_forward

DIM = 30
COARSE_GRID = PhaseSpaceGrid(n_q=81, n_p=81)


def print_header(text):
    """Print a section header."""
    print("\n" + "=" * 70)
    print(f"  {text}")
    print("=" * 70)


def print_populations(rho, max_n=8):
    """Photon-number bars for the first few levels."""
    for n, p in enumerate(rho.populations()[:max_n]):
        bar = "█" * int(p * 50)
        print(f"     n={n}  {p:6.1%} {bar}")


def main():
    print_header("Coherent-State Superpositions")

    # =========================================================================
    print_header("1: How well does a single coherent state fit a CSS?")
    for alpha, parity in ((1.32, Parity.ODD), (1.16, Parity.EVEN), (1.30, Parity.EVEN), (3.0, Parity.ODD)):
        f = max_coherent_fidelity(alpha, parity)
        print(f"   {parity.value:4} CSS, |alpha| = {alpha:.2f}:  best coherent fidelity {f:.4f}")
    print("\n   For large |alpha| even CSSs approach 0.5 from above and odd ones from")
    print("   below: one coherent state covers only one of the two components.")

    # =========================================================================
    print_header("2: When are the two components distinguishable?")
    for alpha in (0.5, 1.0, 1.32, 1.76):
        print(f"   |alpha| = {alpha:.2f}:  p0 = {distinguishability_p0(alpha):.4f}")
    print(f"\n   p0 > 0.99 requires |alpha| > {min_alpha_for_distinguishability(0.99):.3f}")

    # =========================================================================
    print_header("3: Ideal odd CSS")
    ideal = DensityMatrix.from_pure(css_state(1.32, Parity.ODD, DIM))
    w, q, p = wigner_min(ideal, COARSE_GRID)
    print(f"\n   |alpha| = 1.32, <n> = {mean_photon(ideal):.3f}, W_min = {w:+.4f} at ({q:+.2f}, {p:+.2f})")
    print_populations(ideal)

    # =========================================================================
    print_header("4: Forward model for each experiment (before homodyne loss)")
    for preset, row in TABLE1_ROWS.items():
        config = get_preset_config(preset, dim=DIM)
        forward = simulate_forward(config)
        rho = forward.state
        fit = nearest_css(rho)
        w, _, _ = wigner_min(rho, COARSE_GRID)
        print(f"\n   {row}: {get_preset_description(preset)}")
        print(f"   Herald probability: {forward.herald_prob:.3e}")
        print(f"   <n> = {mean_photon(rho):.3f}   purity = {purity(rho):.3f}   W_min = {w:+.4f}")
        print(f"   Nearest CSS: {fit}")
        print_populations(rho, max_n=6)

    print("\n" + "=" * 70 + "\n")


if __name__ == "__main__":
    main()
