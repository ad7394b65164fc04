"""Model variants: noisy search technologies and buyers with heterogeneous search costs."""

from .hetero import (HeterogeneityConfig, duopoly_price_law, het_benefit, het_report, het_solve,
                     het_stable, het_sweep_theta, mu)
from .noisy import (NoisyTech, noisy_benefit, noisy_report, noisy_solve, noisy_sweep_theta,
                    validate_tech)
