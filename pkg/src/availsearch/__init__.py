"""Equilibrium solver for simultaneous-search markets with uncertain product availability."""

from .errors import (CostTooLarge, Degenerate, DegenerateDispersion, DomainError,
                     IdentityInapplicable, InvalidEquilibrium, InvalidShift, NoEquilibrium,
                     NoOligopoly, OutOfSupport, ParseError, SearchModelError, ValidationError)
from .hypergeom import SampleFrame
from .market import MarketConfig, SearchMix
from .pricing import LawKind, PriceLaw, build_price_laws
from .equilibrium import (EqKind, Equilibrium, benefit, enumerate_equilibria, mixed_cost_range,
                          pure_interval, solve_mixed, stable_small_c, virtual_price)

__version__ = "0.1.0"
