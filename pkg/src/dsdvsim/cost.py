"""Analytical routing-overhead cost model.

The periodic and triggered update costs integrate a time-constant expression
over their horizons, so each evaluates to integrand x horizon.  The
metric-measurement cost depends on the metric family: delivery-ratio probes
in both directions for the ETX family, plus packet-pair probes for ETT, and
forward-only pair probes for MD.  Costs are dimensionless packet-cost units.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CostParams:
    p_err: float = 0.0            # per-transmission error probability
    d_avg: float = 0.0            # average node degree
    h: int = 1                    # hop-count horizon
    d_f: tuple = field(default_factory=tuple)   # per-hop forwarding ratios, j=1..h-1
    m_triggers: int = 0           # number of trigger events
    n_nodes: int = 0
    p_nlb: tuple = field(default_factory=tuple) # per-node probabilities
    tau1: float = 0.0             # periodic-update horizon (s)
    tau2: float = 0.0             # triggered-update horizon (s)
    alpha_df: float = 0.0         # forward probe rate (probes/s)
    alpha_dr: float = 0.0         # reverse probe rate (probes/s)
    alpha_s: float = 0.0          # small pair-probe rate (probes/s)
    alpha_l: float = 0.0          # large pair-probe rate (probes/s)
    tau_nl: float = 0.0           # total network lifetime (s)

    def validate(self):
        for name in ("p_err",):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError("%s must be in [0, 1]" % name)
        for p in self.p_nlb:
            if not 0.0 <= p <= 1.0:
                raise ValueError("p_nlb values must be in [0, 1]")
        for name in ("d_avg", "tau1", "tau2", "alpha_df", "alpha_dr",
                     "alpha_s", "alpha_l", "tau_nl"):
            if getattr(self, name) < 0:
                raise ValueError("%s must be >= 0" % name)
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if self.m_triggers < 0 or self.n_nodes < 0:
            raise ValueError("counts must be >= 0")


@dataclass(frozen=True)
class CostBreakdown:
    c_per: float
    c_tri: float
    c_metric: float
    c_total: float


def _update_integrand(p_err, d_avg, h, d_f):
    """P_err*d_avg + d_avg * sum_{i=0}^{h-1} P_err^(i+1) * prod_{j=1}^{i} d_f[j]."""
    total = 0.0
    for i in range(h):
        term = p_err ** (i + 1)
        for j in range(1, i + 1):
            term *= d_f[j - 1]
        total += term
    return p_err * d_avg + d_avg * total


def c_per(params):
    """Cost of periodic full-dump updates over [0, tau1]."""
    params.validate()
    if len(params.d_f) < params.h - 1:
        raise ValueError("need h-1 forwarding ratios")
    return _update_integrand(params.p_err, params.d_avg, params.h,
                             params.d_f) * params.tau1


def c_tri(params):
    """Cost of triggered updates over [0, tau2], over M events and N nodes."""
    params.validate()
    if len(params.p_nlb) < params.n_nodes:
        raise ValueError("need a p_nlb value per node")
    integrand = _update_integrand(params.p_err, params.d_avg, params.h,
                                  params.d_f)
    total = 0.0
    for _p in range(params.m_triggers):
        for n in range(params.n_nodes):
            total += (1.0 - params.p_nlb[n]) * integrand
    return total * params.tau2


def c_qlm_etx_family(alpha_df, alpha_dr, tau_nl):
    """Delivery-ratio probe cost shared by ETX, InvETX and ML."""
    return (alpha_df + alpha_dr) * tau_nl


def c_qlm_ett(alpha_df, alpha_dr, alpha_s, alpha_l, tau_nl):
    """ETX-family probe cost plus the packet-pair probe cost."""
    return c_qlm_etx_family(alpha_df, alpha_dr, tau_nl) + (alpha_s + alpha_l) * tau_nl


def c_qlm_md(alpha_df, tau_nl):
    """Forward-only pair probing: two packets per cycle."""
    return 2.0 * alpha_df * tau_nl


def c_metric(kind, params):
    """The metric-measurement branch for the chosen metric kind."""
    if kind in ("etx", "invetx", "ml"):
        return c_qlm_etx_family(params.alpha_df, params.alpha_dr, params.tau_nl)
    if kind == "ett":
        return c_qlm_ett(params.alpha_df, params.alpha_dr,
                         params.alpha_s, params.alpha_l, params.tau_nl)
    if kind == "md":
        return c_qlm_md(params.alpha_df, params.tau_nl)
    if kind == "hop":
        return 0.0
    raise ValueError("unknown metric kind %r" % kind)


def total_cost(kind, params):
    per = c_per(params)
    tri = c_tri(params)
    met = c_metric(kind, params)
    return CostBreakdown(per, tri, met, per + tri + met)


def params_from_counters(kind, metric_probes, pair_probes, duration_s,
                         base=None):
    """Back out the probe rates from a run's transmission counters.

    For the ETX family the forward and reverse probe rates split the metric
    probe counter evenly; for pair metrics the small/large (or forward pair)
    rates split the pair probe counter.  Update costs keep whatever `base`
    carries (zero by default: only the measurement branch is reproducible
    from counters alone).
    """
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    base = base or CostParams()
    kwargs = {f: getattr(base, f) for f in (
        "p_err", "d_avg", "h", "d_f", "m_triggers", "n_nodes", "p_nlb",
        "tau1", "tau2")}
    kwargs["tau_nl"] = duration_s
    if kind in ("etx", "invetx", "ml", "ett"):
        kwargs["alpha_df"] = kwargs["alpha_dr"] = metric_probes / (2.0 * duration_s)
    if kind == "ett":
        kwargs["alpha_s"] = kwargs["alpha_l"] = pair_probes / (2.0 * duration_s)
    if kind == "md":
        kwargs["alpha_df"] = pair_probes / (2.0 * duration_s)
    return CostParams(**kwargs)


def parse_params(text):
    """Parse a key=value cost-parameter file; d_f and p_nlb are comma lists."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("line %d: expected key = value" % lineno)
        key, val = (p.strip() for p in line.split("=", 1))
        if key in ("d_f", "p_nlb"):
            values[key] = tuple(float(x) for x in val.split(",") if x.strip())
        elif key in ("h", "m_triggers", "n_nodes"):
            values[key] = int(val)
        elif key == "metric":
            values[key] = val
        else:
            values[key] = float(val)
    kind = values.pop("metric", "etx")
    unknown = set(values) - {f for f in CostParams.__dataclass_fields__}
    if unknown:
        raise ValueError("unknown cost parameters: %s" % ", ".join(sorted(unknown)))
    return kind, CostParams(**values)
