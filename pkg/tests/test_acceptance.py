"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Every sub-check of a criterion is evaluated and reported before the test
asserts, so a failing criterion still shows which parts held.
"""

import time
from pathlib import Path

import numpy as np

from availsearch import equilibrium as eqm
from availsearch import hypergeom as hg
from availsearch import oracle
from availsearch.cli import main
from availsearch.equilibrium import EqKind
from availsearch.extensions import hetero as het
from availsearch.extensions import noisy
from availsearch.extensions.hetero import HeterogeneityConfig
from availsearch.extensions.noisy import NoisyTech
from availsearch.hypergeom import SampleFrame
from availsearch.market import MarketConfig, SearchMix
from availsearch.outcomes import report, sweep_theta
from availsearch.pricing import build_price_laws

from conftest import record

EXAMPLE = MarketConfig(3, 1.0, 0.05, (0, 0, 0.9, 0.1))
EXAMPLE_AFTER = EXAMPLE.with_theta((0, 0, 0.75, 0.25))
FIG1 = MarketConfig(3, 1.0, 0.05, (0, 0.05, 0.90, 0.05))


def _finish(number, title, checks, elapsed=None, limit=None):
    """checks: list of (name, ok, detail)."""
    if limit is not None:
        checks = checks + [("runtime", elapsed < limit, f"{elapsed:.2f}s < {limit}s")]
    failed = [name for name, ok, _ in checks if not ok]
    detail = "; ".join(f"{name}={'ok' if ok else 'FAIL'} ({d})" for name, ok, d in checks)
    record(number, title, not failed, detail)
    assert not failed, f"criterion {number} failed checks: {failed}\n{detail}"


def _within(value, target, tol):
    return abs(value - target) <= tol


def _stable_mixed(cfg):
    eqs = [e for e in eqm.stable_active(cfg) if e.kind is EqKind.MIXED]
    assert len(eqs) == 1
    return eqs[0]


# --------------------------------------------------------------- criterion 1

def test_criterion_1_example_reproduction():
    t0 = time.perf_counter()
    checks = []
    targets = [(EXAMPLE, "before", 0.78, 0.153, 0.758), (EXAMPLE_AFTER, "after", 0.61, 0.235, 0.685)]
    for cfg, tag, share, price, surplus in targets:
        e = _stable_mixed(cfg)
        rep = report(cfg, e)
        checks.append((f"{tag}-share", _within(1 - e.q, share, 0.01),
                       f"{1 - e.q:.4f} vs {share}±0.01"))
        checks.append((f"{tag}-price", _within(rep.price, price, 0.005),
                       f"{rep.price:.4f} vs {price}±0.005"))
        checks.append((f"{tag}-surplus", _within(rep.surplus, surplus, 0.005),
                       f"{rep.surplus:.4f} vs {surplus}±0.005"))
    _finish(1, "worked example before/after availability shift", checks,
            time.perf_counter() - t0, 5)


# --------------------------------------------------------------- criterion 2

def test_criterion_2_equilibrium_counts():
    t0 = time.perf_counter()
    counts = {c: len(eqm.active(eqm.enumerate_equilibria(FIG1, c))) for c in (0.02, 0.05, 0.11)}
    checks = [
        ("c=0.05", counts[0.05] == 4, f"{counts[0.05]} active, need exactly 4"),
        ("c=0.02", counts[0.02] >= 1, f"{counts[0.02]} active, need >= 1"),
        ("c=0.11", counts[0.11] == 0, f"{counts[0.11]} active, need 0"),
    ]
    _finish(2, "equilibrium counts with a monopoly share", checks, time.perf_counter() - t0, 10)


# --------------------------------------------------------------- criterion 3

def test_criterion_3_availability_sweep_shape():
    t0 = time.perf_counter()
    base = MarketConfig(3, 1.0, 0.04, (0, 0, 0.9, 0.1))
    sw = sweep_theta(base, 3, 2, np.linspace(0.0, 0.4, 50))
    mixed, pure = sw.branch("mixed-2"), sw.branch("pure-2")
    regions = []
    for r in sw.rows:
        reg = tuple(sorted(r.branches))
        if not regions or regions[-1] != reg:
            regions.append(reg)
    checks = [
        ("mixed-price-up", len(mixed) > 1 and bool(np.all(np.diff([r.price for _, _, r in mixed]) > 0)),
         f"{len(mixed)} points"),
        ("mixed-surplus-down",
         len(mixed) > 1 and bool(np.all(np.diff([r.surplus for _, _, r in mixed]) < 0)),
         f"{len(mixed)} points"),
        ("pure-price-down", len(pure) > 1 and bool(np.all(np.diff([r.price for _, _, r in pure]) < 0)),
         f"{len(pure)} points"),
        ("regions", regions == [("mixed-2",), ("mixed-2", "pure-2"), ("pure-2",)],
         " -> ".join("+".join(r) or "none" for r in regions)),
    ]
    _finish(3, "availability sweep over theta_3 in [0.1, 0.5]", checks,
            time.perf_counter() - t0, 60)


# --------------------------------------------------------------- criterion 4

def _hypergeom_violations():
    bad = {k: 0 for k in ("normalization", "dominance", "single-peak", "mode", "ratio",
                          "psi", "gauss")}
    grid = np.linspace(0.0, 1.0, 11)
    inner = np.linspace(0.01, 1.0, 50)
    for N in range(3, 13):
        for n in range(0, N + 1):
            for k in range(1, N + 1):
                f = SampleFrame(N, n, k)
                vec = hg.pmf_exact_vector(N, n, k)
                bad["normalization"] += sum(vec) != 1
                fell = False
                for a, b in zip(vec, vec[1:]):
                    fell |= b < a
                    bad["single-peak"] += fell and b > a
                bad["mode"] += hg.mode(f) != vec.index(max(vec))
                if N - n - k + 1 >= 1:
                    bad["gauss"] += int(np.max(hg.gauss_identity_residual(f, grid)) > 1e-12)
                if n >= 2 and k < N:
                    for l in range(0, k + 2):
                        bad["dominance"] += hg.dominance_gap(f, l, exact=True) < 0
                if k < N:
                    hi = hg.pmf_exact_vector(N, n, k + 1)
                    for m in range(0, k):
                        terms = (vec[m], vec[m + 1], hi[m], hi[m + 1])
                        if all(t > 0 for t in terms):
                            bad["ratio"] += not vec[m + 1] / vec[m] < hi[m + 1] / hi[m]
                if n >= 2 and k < N and n <= N - k + 1:
                    bad["psi"] += int(not np.all(hg.psi(N, n, k, inner) > 0))
    return bad


def test_criterion_4_hypergeometric_identities():
    bad = _hypergeom_violations()
    checks = [(name, count == 0, f"{count} violations") for name, count in bad.items()]
    _finish(4, "hypergeometric identity suite, N <= 12", checks)


# --------------------------------------------------------------- criterion 5

STRUCTURE_CORPUS = [
    EXAMPLE,
    FIG1,
    MarketConfig(4, 1.0, 0.03, (0, 0.1, 0.3, 0.4, 0.2)),
    MarketConfig(5, 2.0, 0.02, (0.05, 0.05, 0.2, 0.3, 0.2, 0.2)),
    MarketConfig(4, 1.0, 0.02, (0, 0, 0, 0.5, 0.5)),
    MarketConfig(6, 1.0, 0.01, (0, 0, 0.1, 0.2, 0.3, 0.2, 0.2)),
]


def test_criterion_5_equilibrium_structure():
    worst = {"concavity": -np.inf, "positivity": np.inf, "boundary": 0.0, "root-count": 0,
             "slope-split": 0, "slack": np.inf, "zero-cutoffs": 0.0}
    grid = np.linspace(0.0, 1.0, 41)
    for cfg in STRUCTURE_CORPUS:
        v, top = cfg.v, cfg.max_search
        for k in range(1, top + 1):
            vals = np.array([eqm.benefit(cfg, k, q) for q in grid])
            worst["concavity"] = max(worst["concavity"], np.max(np.diff(vals, 2)) / v)
            worst["positivity"] = min(worst["positivity"], np.min(vals[1:-1]) / v)
            rng = eqm.mixed_cost_range(cfg, k)
            for c in np.linspace(rng.lower, rng.upper, 9)[1:-1]:
                roots = eqm.solve_mixed(cfg, k, c)
                worst["root-count"] += not 1 <= len(roots) <= 2
                if len(roots) == 2:
                    worst["slope-split"] += sum(r.slope > 0 for r in roots) != 1
        # The benefit curve reaches these limits linearly; probe 1e-8 inside the endpoint.
        for k in range(2, top + 1):
            worst["boundary"] = max(worst["boundary"], abs(
                eqm.benefit(cfg, k, 1 - 1e-8) - eqm.pure_interval(cfg, k)[0]) / v)
        for k in range(1, top):
            worst["boundary"] = max(worst["boundary"], abs(
                eqm.benefit(cfg, k, 1e-8) - eqm.pure_interval(cfg, k + 1)[1]) / v)
        worst["zero-cutoffs"] = max(worst["zero-cutoffs"],
                                    abs(eqm.mixed_cost_range(cfg, 1).lower) / v,
                                    abs(eqm.mixed_cost_range(cfg, top).lower) / v)
        for c in np.linspace(0.005, 0.15, 12):
            for e in eqm.enumerate_equilibria(cfg, c):
                worst["slack"] = min(worst["slack"], e.slack / v)
    checks = [
        ("concavity", worst["concavity"] <= 1e-8, f"max 2nd difference {worst['concavity']:.2e}v"),
        ("positivity", worst["positivity"] > 0, f"min interior benefit {worst['positivity']:.2e}v"),
        ("boundary", worst["boundary"] <= 1e-6, f"max gap {worst['boundary']:.2e}v"),
        ("root-count", worst["root-count"] == 0, f"{worst['root-count']} bad counts"),
        ("one-stable-of-two", worst["slope-split"] == 0, f"{worst['slope-split']} violations"),
        ("participation", worst["slack"] >= -1e-9, f"min slack {worst['slack']:.3e}v"),
        ("zero-cutoffs", worst["zero-cutoffs"] <= 1e-8, f"max {worst['zero-cutoffs']:.2e}v"),
    ]
    _finish(5, "equilibrium structure on a config corpus", checks)


# --------------------------------------------------------------- criterion 6

def test_criterion_6_monte_carlo_oracle():
    t0 = time.perf_counter()
    e = _stable_mixed(EXAMPLE)
    rep = oracle.simulate(EXAMPLE, e, trials=1_000_000, seed=0)
    flat = oracle.profit_flatness(rep)
    gap = oracle.indifference_gap(rep)
    price_z = abs(rep.price.mean - report(EXAMPLE, e).price) / rep.price.se
    q_bad = e.q + 0.1
    bad_eq = eqm.Equilibrium(EqKind.MIXED, e.k, q_bad,
                             build_price_laws(EXAMPLE, SearchMix(e.k, q_bad)), False)
    control = oracle.indifference_gap(oracle.simulate(EXAMPLE, bad_eq, trials=1_000_000, seed=0))
    checks = [
        ("flatness", flat <= 4, f"max decile z {flat:.2f}"),
        ("indifference", gap.within(4), f"z {gap.z:.2f}"),
        ("mean-price", price_z <= 3, f"z {price_z:.2f}"),
        ("negative-control", control.z > 4, f"z {control.z:.1f}"),
    ]
    _finish(6, "Monte Carlo validation at 1e6 trials", checks, time.perf_counter() - t0, 60)


# --------------------------------------------------------------- criterion 7

def _het_corpus():
    rng = np.random.default_rng(11)
    out = []
    while len(out) < 10:
        N = int(rng.integers(3, 7))
        lam = float(rng.uniform(0.05, 0.9))
        th = rng.dirichlet(np.ones(N + 1))
        th[0] = 0
        th[2] += 0.2
        th /= th.sum()
        th[-1] = 1 - th[:-1].sum()
        h = HeterogeneityConfig(MarketConfig(N, 1.0, 1.0, th), lam)
        out.append(h.with_market(h.market.with_cost(0.5 * het.het_peak(h)[1])))
    return out


def _het_rows(h, i, j):
    rows = het.het_sweep_theta(h, i, j, np.linspace(0, 0.5 * h.market.theta[j], 5))
    return [o for _, o in rows if o is not None]


def test_criterion_7_heterogeneity():
    worst_quad = 0.0
    for lam in np.linspace(0.05, 0.95, 10):
        for N in (3, 4, 6):
            for q in np.linspace(0.02, 1.0, 15):
                law = het.duopoly_price_law(q, lam, N, 1.0)
                worst_quad = max(worst_quad, abs(het.spread_closed_form(het.mu(q, lam, N))
                                                 - het.spread_quadrature(law)))
    h = HeterogeneityConfig(MarketConfig(3, 1.0, 0.02, (0, 0.05, 0.85, 0.1)), 0.1)
    vals = np.array([het.het_benefit(q, h) for q in np.linspace(0, 1, 200)])
    signs = np.sign(np.diff(vals))
    inverse_u = bool(np.all(signs != 0) and np.count_nonzero(np.diff(signs)) == 1)
    q_star = het.het_peak(h)[0]
    m_resid = abs(het.stationary_residual(het.mu(q_star, h.lam, h.N)))
    scale = max(het.spread_closed_form(m) for m in np.geomspace(1e-6, 1e3, 200))
    sign_fail = []
    for idx, hc in enumerate(_het_corpus()):
        for i in (2, 3):
            r = _het_rows(hc, i, 1)
            if not (np.all(np.diff([o.surplus for o in r]) >= 0)
                    and np.all(np.diff([o.q for o in r]) <= 1e-12)):
                sign_fail.append(f"(i)#{idx}")
        if hc.N > 3:
            r = _het_rows(hc, hc.N, 3)
            if not np.allclose([o.surplus for o in r], r[0].surplus, atol=1e-12, rtol=0):
                sign_fail.append(f"(ii)#{idx}")
        r = _het_rows(hc, 3, 2)
        ok = (len(r) >= 2 and np.all(np.diff([o.q for o in r]) > 0)
              and np.all(np.diff([o.surplus for o in r]) < 0)
              and het.dmu_dtheta2(hc, het.het_stable(hc).q) < 0)
        if not ok:
            sign_fail.append(f"(iii)#{idx}")
    checks = [
        ("closed-vs-quadrature", worst_quad <= 1e-9, f"max {worst_quad:.2e}v"),
        ("inverse-U", inverse_u and 0 < q_star < 1, f"peak at q={q_star:.4f}"),
        ("stationary-point", m_resid <= 1e-8, f"|M(mu)| {m_resid:.1e}"),
        ("scale<1", scale < 1, f"max spread/v {scale:.4f}"),
        ("comparative-statics", not sign_fail, ", ".join(sign_fail) or "10 configs"),
    ]
    _finish(7, "search-cost heterogeneity extension", checks)


# --------------------------------------------------------------- criterion 8

def _techs(N=4):
    def uniform():
        return NoisyTech([[1 / (N - l + 1) if k >= l else 0 for k in range(1, N + 1)]
                          for l in range(1, N + 1)])

    def spill(eps):
        d = np.eye(N)
        for l in range(1, N):
            d[l - 1, l - 1], d[l - 1, l] = 1 - eps, eps
        return NoisyTech(d)

    def geometric(r):
        rows = []
        for l in range(1, N + 1):
            w = np.array([r ** (k - l) if k >= l else 0.0 for k in range(1, N + 1)])
            rows.append(w / w.sum())
        return NoisyTech(rows)

    return [uniform(), spill(0.1), spill(0.3), geometric(0.5), geometric(0.2)]


def test_criterion_8_noisy_search():
    base = MarketConfig(4, 1.0, 0.01, (0, 0, 0.5, 0.3, 0.2))
    ident = NoisyTech.identity(4)
    equiv = max(abs(noisy.noisy_benefit(base, ident, q) - eqm.benefit(base, base.max_search, q))
                for q in np.linspace(0.02, 0.98, 25))
    cfg = MarketConfig(4, 1.0, 0.01, (0, 0.1, 0.5, 0.2, 0.2))
    grid = np.linspace(0, 0.09, 4)
    sign_fail, limit = [], 0.0
    for t, tech in enumerate(_techs()):
        assert noisy.validate_tech(tech, 4) == []
        limit = max(limit, noisy.noisy_benefit(cfg, tech, 1e-6))

        def col(rows, name):
            return [getattr(o, name) for _, o in rows if o is not None]

        for i in (2, 3):
            r = noisy.noisy_sweep_theta(cfg, tech, i, 1, grid)
            if not (np.all(np.diff(col(r, "q")) <= 1e-12)
                    and np.all(np.diff(col(r, "surplus")) >= -1e-12)):
                sign_fail.append(f"(i)#{t}")
        r = noisy.noisy_sweep_theta(cfg, tech, 4, 3, grid)
        if not np.allclose(col(r, "surplus"), col(r, "surplus")[0], atol=1e-12, rtol=0):
            sign_fail.append(f"(ii)#{t}")
        r = noisy.noisy_sweep_theta(cfg, tech, 3, 2, grid)
        if not (len(col(r, "q")) >= 3 and np.all(np.diff(col(r, "q")) > 0)
                and np.all(np.diff(col(r, "surplus")) < 0)):
            sign_fail.append(f"(iii)#{t}")
    checks = [
        ("degenerate-equivalence", equiv <= 1e-10, f"max {equiv:.1e}v"),
        ("comparative-statics", not sign_fail, ", ".join(sign_fail) or "5 techs"),
        ("vanishing-at-zero", limit <= 1e-6, f"max benefit at q=1e-6 {limit:.2e}v"),
    ]
    _finish(8, "noisy-search extension", checks)


# --------------------------------------------------------------- criterion 9

def test_criterion_9_determinism(tmp_path):
    golden = Path(__file__).parent / "golden"
    checks = []
    for fig in ("1", "2", "3", "4", "example51"):
        a, b = tmp_path / f"{fig}a.csv", tmp_path / f"{fig}b.csv"
        codes = (main(["figure", fig, "--out", str(a), "--seed", "7"]),
                 main(["figure", fig, "--out", str(b), "--seed", "7"]))
        same = codes == (0, 0) and a.read_bytes() == b.read_bytes()
        gold = same and a.read_bytes() == (golden / f"figure_{fig}.csv").read_bytes()
        checks.append((f"figure-{fig}", same and gold,
                       "identical to golden" if gold else "differs"))
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("N=3 v=1 c=0.04 theta=0,0,0.9,0.1\n")
    runs = []
    for _ in range(2):
        out = tmp_path / "validate.csv"
        main(["validate", "--config", str(cfg), "--trials", "20000", "--seed", "42",
              "--out", str(out)])
        runs.append(out.read_bytes())
    checks.append(("validate-seeded", runs[0] == runs[1], "two seeded runs"))
    _finish(9, "byte-identical CSV output", checks)
