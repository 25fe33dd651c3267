"""Independent high-precision (50-digit) evaluations of every forcing-term
formula, used to pin the double-precision implementation."""

from mpmath import mp, mpf

from inewton import ForcingInputs

mp.dps = 50


def oracle_p(schedule, nu):
    nu = mpf(nu)
    if schedule == "steep":
        return min(mpf(2), 2 - (mpf("2.5") / nu) * mp.exp(-nu))
    if schedule == "exp":
        return min(mpf(2), 2 - mp.exp(1 - nu ** mpf("0.7")))
    return min(mpf(2), nu ** 3 / 250 + nu ** 2 / 250 + nu / 250 + 1)


def oracle_phi(schedule, nu, cfg):
    nu = mpf(nu)
    phi0 = mpf(repr(cfg.phi0))
    if schedule == "steep":
        val = phi0 * mp.exp(1 - nu)
    elif schedule == "exp":
        val = phi0 * mp.exp(1 - nu ** mpf("0.7"))
    else:
        val = phi0 * (-(nu ** 3) / 250 + nu ** 2 / 250 + nu / 250 + 1)
    return max(mpf(repr(cfg.eps0)), min(phi0, val))


def oracle_eta(strategy, cfg, inp):
    r = mpf(repr(cfg.r))
    cur = mpf(repr(inp.res_norm_current))
    prev = mpf(repr(inp.res_norm_prev)) if inp.res_norm_prev is not None else None
    if strategy.kind == "brownsaad":
        return mpf("0.5") ** inp.nu
    if strategy.kind == "ew1":
        return mpf(repr(inp.disagreement_norm_prev)) / prev
    if strategy.kind == "ew2":
        return mpf(repr(cfg.gamma)) * (cur / prev) ** r
    if strategy.kind == "an":
        t = (mpf(repr(inp.actual_reduction_prev))
             / mpf(repr(inp.predicted_reduction_prev)))
        ep = mpf(repr(inp.eta_prev))
        if t < mpf(repr(cfg.an_p1)):
            return 1 - 2 * mpf(repr(cfg.an_p1))
        if t < mpf(repr(cfg.an_p2)):
            return ep
        if t < mpf(repr(cfg.an_p3)):
            return mpf("0.8") * ep
        return mpf("0.5") * ep
    if strategy.kind == "botti":
        lr = mpf(repr(inp.linear_model_residual_norm_prev))
        ac = mpf(repr(inp.residual_change_norm_prev))
        return lr / (lr + mpf(repr(cfg.botti_alpha)) * ac)
    if strategy.kind == "inex1":
        ratio = mpf(repr(inp.disagreement_norm_prev)) / prev
        return ratio ** oracle_p(strategy.schedule, inp.nu)
    if strategy.kind == "inex2":
        return oracle_phi(strategy.schedule, inp.nu, cfg) * (cur / prev) ** r
    raise AssertionError(strategy.kind)


def random_history(rng, nu=None):
    prev = float(rng.uniform(0.1, 10.0))
    cur = prev * float(rng.uniform(0.01, 1.5))
    lin = prev * float(rng.uniform(1e-8, 0.5))
    return ForcingInputs(
        nu=int(rng.integers(1, 12)) if nu is None else nu,
        res_norm_current=cur,
        res_norm_prev=prev,
        linear_model_residual_norm_prev=lin,
        disagreement_norm_prev=float(rng.uniform(0.0, 1.2)) * prev,
        actual_reduction_prev=prev - cur,
        predicted_reduction_prev=prev - lin,
        residual_change_norm_prev=float(rng.uniform(0.0, 2.0)) * prev,
        eta_prev=float(rng.uniform(1e-6, 0.9)),
    )
