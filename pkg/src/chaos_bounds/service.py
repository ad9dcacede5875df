"""FastAPI service exposing the package over HTTP.

Endpoints map one-to-one onto the CLI commands; the CLI is a thin client of
this app (in-process by default).  Domain validation failures return 422
with ``error.type = "validation"``; numeric failures return 500 with
``error.type = "numeric"``.  Non-finite floats are rendered as strings so
every payload is strict JSON.
"""

from __future__ import annotations

import datetime

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__, bounds, montecarlo
from .errors import NumericError, ValidationError
from .hermite import expand, expected_gradient_tensor
from .models import (
    BoundRequest,
    BoundResponse,
    CheckRequest,
    CheckResponse,
    EmpiricalRequest,
    EmpiricalResponse,
    ExpBoundRequest,
    ExpBoundResponse,
    Meta,
    NormRequest,
    NormResponse,
    PolyRequest,
    PolyResponse,
    ReportRequest,
    ReportResponse,
    TailPairModel,
    TailRequest,
    TailResponse,
)
from .norms import mixed_norm
from .partitions import parse_pair
from .spaces import type2_K

app = FastAPI(title="chaos-bounds", version=__version__)


def _meta() -> Meta:
    return Meta(
        package="chaos-bounds",
        version=__version__,
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )


@app.exception_handler(ValidationError)
async def _validation_handler(_request, exc: ValidationError):
    return JSONResponse(status_code=422,
                        content={"error": {"type": "validation", "message": str(exc)}})


@app.exception_handler(NumericError)
async def _numeric_handler(_request, exc: NumericError):
    return JSONResponse(status_code=500,
                        content={"error": {"type": "numeric", "message": str(exc)}})


def _finite(x):
    if isinstance(x, float) and not (x == x and abs(x) != float("inf")):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _jsonsafe(obj):
    if isinstance(obj, dict):
        return {k: _jsonsafe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonsafe(v) for v in obj]
    return _finite(obj)


@app.get("/health")
def health():
    return {"status": "ok", "package": "chaos-bounds", "version": __version__}


@app.post("/norm", response_model=NormResponse, response_model_exclude_none=True)
def norm_endpoint(req: NormRequest):
    A = req.tensor.to_core()
    pair = parse_pair(req.pair)
    est = mixed_norm(A, pair, req.config.to_core())
    return NormResponse(seed=req.config.seed, **est.to_dict(), meta=_meta())


def _mc_samples_cfg(config, samples, seed, p_values):
    return montecarlo.MCConfig(samples=samples, p_values=tuple(p_values), seed=seed)


@app.post("/bound", response_model=BoundResponse, response_model_exclude_none=True)
def bound_endpoint(req: BoundRequest):
    A = req.tensor.to_core()
    cfg = req.config.to_core()
    reports = []
    for p in req.p:
        if req.side in ("lower", "both"):
            reports.append(bounds.lower_sum(A, p, cfg))
        if req.side in ("upper", "both"):
            reports.append(bounds.upper_sum(A, p, cfg))
        if req.side == "special":
            K = req.K if req.K is not None else type2_K(A.space, req.calibration)
            reports.append(bounds.special_space_upper(A, p, K, cfg))
        if req.side == "lq":
            lo, up = bounds.lq_bound(A, p, q=req.q, cfg=cfg)
            reports.extend([lo, up])
    return BoundResponse(seed=req.config.seed,
                         reports=[r.to_dict() for r in reports], meta=_meta())


@app.post("/tail", response_model=TailResponse, response_model_exclude_none=True)
def tail_endpoint(req: TailRequest):
    A = req.tensor.to_core()
    cfg = req.config.to_core()
    tails = []
    for t in req.t:
        up = bounds.tail_exponent_upper(A, t, cfg)
        lo = bounds.tail_exponent_lower(A, t, cfg)
        tails.append(TailPairModel(t=t, upper=_jsonsafe(up.to_dict()),
                                   lower=_jsonsafe(lo.to_dict())))
    return TailResponse(seed=req.config.seed, tails=tails, meta=_meta())


@app.post("/exp-bound", response_model=ExpBoundResponse, response_model_exclude_none=True)
def exp_bound_endpoint(req: ExpBoundRequest):
    A = req.tensor.to_core()
    cfg = req.config.to_core()
    reports = [bounds.exp_chaos_bound(A, p, q=req.q, cfg=cfg, full_m=req.full_m)
               for p in req.p]
    return ExpBoundResponse(seed=req.config.seed,
                            reports=[r.to_dict() for r in reports], meta=_meta())


@app.post("/poly", response_model=PolyResponse, response_model_exclude_none=True)
def poly_endpoint(req: PolyRequest):
    f = req.poly.to_core()
    if req.what == "expand":
        exp_f = expand(f)
        coeffs = {
            "(" + ",".join(str(e) for e in dvec) + ")": [float(v) for v in c]
            for dvec, c in sorted(exp_f.coeffs.items())
        }
        return PolyResponse(seed=req.config.seed, what="expand",
                            result={"coefficients": coeffs}, meta=_meta())
    if req.what == "gradients":
        grads = {}
        for d in range(1, f.D + 1):
            grads[str(d)] = expected_gradient_tensor(f, d).to_dict()
        return PolyResponse(seed=req.config.seed, what="gradients",
                            result={"tensors": grads}, meta=_meta())
    rep = bounds.general_poly_bounds(f, req.p[0], q=req.q, K=req.K,
                                     cfg=req.config.to_core())
    result = rep.to_dict()
    if req.t:
        result["eta"] = {str(t): _finite(rep.eta(t)) for t in req.t}
    return PolyResponse(seed=req.config.seed, what="bounds",
                        result=_jsonsafe(result), meta=_meta())


_SAMPLERS = {
    "decoupled": montecarlo.decoupled_sampler,
    "undecoupled": montecarlo.undecoupled_sampler,
    "exponential": lambda A: montecarlo.exponential_sampler(A, "direct"),
    "exponential-gg": lambda A: montecarlo.exponential_sampler(A, "gg"),
}


@app.post("/empirical", response_model=EmpiricalResponse, response_model_exclude_none=True)
def empirical_endpoint(req: EmpiricalRequest):
    A = req.tensor.to_core()
    sampler = _SAMPLERS[req.sampler](A)
    cfg = montecarlo.MCConfig(samples=req.samples, p_values=tuple(req.p), seed=req.seed,
                              bootstrap=req.bootstrap)
    ests = montecarlo.empirical_moment(sampler, cfg)
    return EmpiricalResponse(
        sampler=req.sampler, seed=req.seed,
        moments=[e.to_dict() for e in ests], meta=_meta(),
    )


@app.post("/check", response_model=CheckResponse, response_model_exclude_none=True)
def check_endpoint(req: CheckRequest):
    A = req.tensor.to_core()
    mc_cfg = montecarlo.MCConfig(samples=req.samples, p_values=(req.p,), seed=req.seed)
    if req.what == "decoupling":
        result = {"ratio": montecarlo.decoupling_ratio(A, req.p, mc_cfg), "p": req.p}
    elif req.what == "hypercontractivity":
        result = {
            "ratio": montecarlo.hypercontractivity_ratio(A, req.p, req.q, mc_cfg),
            "p": req.p, "q": req.q,
        }
    elif req.what == "alpha-plus":
        result = {"ratio": montecarlo.alpha_plus_ratio(A, mc_cfg)}
    else:
        res = montecarlo.sandwich_check(A, req.p, mc_cfg, req.config.to_core())
        result = res.to_dict()
        result["p"] = req.p
    return CheckResponse(what=req.what, result=_jsonsafe(result),
                         seed=req.seed, samples=req.samples, meta=_meta())


@app.post("/report", response_model=ReportResponse, response_model_exclude_none=True)
def report_endpoint(req: ReportRequest):
    A = req.tensor.to_core()
    cfg = req.config.to_core()
    doc: dict = {
        "tensor": {"d": A.d, "n": A.n, "m": A.m, "space": A.space.to_dict()},
        "constant_policy": {"C_d": 1.0, "calibration": req.calibration},
        "seed": req.seed,
        "samples": req.samples,
    }
    doc["bounds"] = []
    for p in req.p:
        entry = {
            "p": p,
            "lower": bounds.lower_sum(A, p, cfg).to_dict(),
            "upper": bounds.upper_sum(A, p, cfg).to_dict(),
        }
        if A.space.kind == "lq":
            K = type2_K(A.space, req.calibration)
            entry["special"] = bounds.special_space_upper(A, p, K, cfg).to_dict()
            lo, up = bounds.lq_bound(A, p, cfg=cfg)
            entry["lq"] = {"lower": lo.to_dict(), "upper": up.to_dict()}
            if A.space.q >= 2:
                entry["exponential"] = bounds.exp_chaos_bound(A, p, cfg=cfg).to_dict()
        doc["bounds"].append(entry)
    doc["tails"] = [
        {
            "t": t,
            "upper": bounds.tail_exponent_upper(A, t, cfg).to_dict(),
            "lower": bounds.tail_exponent_lower(A, t, cfg).to_dict(),
        }
        for t in req.t
    ]
    mc_cfg = montecarlo.MCConfig(samples=req.samples, p_values=tuple(req.p), seed=req.seed)
    doc["empirical"] = [
        e.to_dict()
        for e in montecarlo.empirical_moment(montecarlo.decoupled_sampler(A), mc_cfg)
    ]
    checks: dict = {}
    for p in req.p:
        one = montecarlo.MCConfig(samples=req.samples, p_values=(p,), seed=req.seed)
        checks[f"sandwich_p={p:g}"] = montecarlo.sandwich_check(A, p, one, cfg).to_dict()
        checks[f"conjecture_gap_p={p:g}"] = bounds.conjecture_gap(A, p, one, cfg)
        try:
            checks[f"decoupling_p={p:g}"] = montecarlo.decoupling_ratio(A, p, one)
        except ValidationError:
            pass  # only defined for symmetric, diagonal-free tensors
    doc["checks"] = checks
    return ReportResponse(document=_jsonsafe(doc), meta=_meta())
