"""Synthetic-recovery scoring shared by the acceptance suite."""

from corrfilter.dynamics import analyze
from corrfilter.synth import SynthSpec, generate

MODES = ("raw", "detrended")
KMEDOIDS_MAX_NCL = 30  # PAM sweep cap; the planted optimum sits at 10


def recovery_checks(seed: int, **spec) -> dict:
    """Score the four recovery orderings on one seeded panel.

    (a) and (c) read the raw panel, (d) the detrended one, (b) both.
    Non-DBHT methods are compared at the DBHT cluster count.
    """
    ret, tax = generate(SynthSpec(seed=seed, **spec))
    sec = tax.labels(ret.tickers)
    tree = analyze(ret, sec, methods=("sl", "al", "cl", "dbht"), modes=MODES)
    pam = analyze(ret, sec, methods=("kmedoids",), modes=MODES, max_ncl=KMEDOIDS_MAX_NCL, pam_restarts=5)
    res = {mo: {**tree[mo].methods, **pam[mo].methods} for mo in MODES}
    raw, det = res["raw"], res["detrended"]
    y = [raw[m].disparity for m in ("sl", "al", "dbht")]
    return {
        "a": bool(y[0] > y[1] > y[2]),
        "b": all(det[m].max_ari > raw[m].max_ari for m in raw),
        "c": abs(raw["dbht"].argmax_ncl - 10) <= 3 and raw["sl"].argmax_ncl > 20,
        "d": all(det[m].max_ari >= 0.8 for m in ("dbht", "cl", "kmedoids")),
        "detail": {mo: {m: (s.n_cl, round(s.disparity, 3), round(s.max_ari, 3), s.argmax_ncl)
                        for m, s in res[mo].items()} for mo in MODES},
    }
