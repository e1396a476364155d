"""Generator that replays a fixed panel instead of simulating one.

Two uses: scoring externally produced simulations (any tool that can write
the panel CSV), and null-calibration runs where the "simulated" class is
held-out real data, so a sound detector should land near 0.5 AUC.
"""

from __future__ import annotations

from ..errors import ValidationError
from ..panel import Panel
from ..seeding import derive_seed
from .base import as_panel
import numpy as np


class ReplayGenerator:
    """Returns slices of a stored panel; ``fit`` is a no-op."""

    name = "replay"

    def __init__(self, panel: Panel):
        self.panel = panel

    def fit(self, panel: Panel) -> "ReplayGenerator":
        return self

    def simulate(self, n_assets: int, length: int, seed: int) -> Panel:
        """Return up to the requested shape; never fabricates data.

        Rows are drawn without replacement when fewer assets are requested;
        requesting a longer history than stored is an error.
        """
        stored = self.panel
        if length > stored.n_periods:
            raise ValidationError(
                f"replay panel has {stored.n_periods} periods, {length} requested"
            )
        n = min(n_assets, stored.n_assets)
        rng = np.random.default_rng(derive_seed(seed, "replay"))
        rows = np.sort(rng.choice(stored.n_assets, size=n, replace=False))
        return as_panel(stored.matrix[rows, :length])
