import math
from typing import Any

from timeloc.context import RunContext
from timeloc.models.disorder import correlation_length
from timeloc.models.localization import BornInput, born_xi, lyapunov_ensemble


def default_step(k0: float, energy: float) -> float:
    """A tenth of the shorter of the correlation length and the de Broglie wavelength."""
    scales = [correlation_length(k0)]
    if energy != 0:
        scales.append(2 * math.pi / math.sqrt(2 * abs(energy)))
    return min(scales) / 10


def run_born_vs_tm(context: RunContext) -> dict[str, Any]:
    config = context.config
    born = born_xi(BornInput(config.energy, config.k0, config.V))
    h = config.h if config.h is not None else default_step(config.k0, config.energy)
    L = config.L if config.L is not None else 200 * born.xi
    context.log(f"Born xi={born.xi:.4f} ({born.regime} regime); transfer matrix over {config.realizations} lines of {round(L / h)} steps")
    estimate = lyapunov_ensemble(config.k0, config.V, L, h, config.energy, config.realizations, config.seed, context.threads, config.cadence)
    xi_stderr = estimate.stderr / estimate.gamma**2 if estimate.gamma > 0 else float("nan")
    context.write_table(
        "loclength.csv", ["E_shifted", "xi_born", "xi_tm", "stderr", "indicator"],
        [(config.energy, born.xi, estimate.xi, xi_stderr, born.indicator)],
        [f"xi is the density decay length; L={estimate.L!r} h={h!r} realizations={estimate.realizations}"],
    )  # fmt: skip
    return {
        "xi_born": born.xi, "xi_tm": estimate.xi, "xi_tm_stderr": xi_stderr, "weak_scattering_indicator": born.indicator,
        "zeta": born.zeta, "regime": born.regime, "relative_difference": abs(estimate.xi - born.xi) / born.xi,
    }  # fmt: skip
