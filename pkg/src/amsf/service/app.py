"""FastAPI service wrapping the experiment harness.

Run it with any ASGI server, e.g. `uvicorn amsf.service.app:app`. Errors map
to a structured body {error_kind, message} so clients can translate them to
exit codes: config -> 400, io -> 404, numeric -> 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import ConfigError, InputIOError, NumericError
from ..harness import encode_prompt, inspect_embeddings, load_config, run_ablation_suite, run_experiment
from .schemas import (
    AblateRequest,
    AblateResponse,
    EncodeRequest,
    EncodeResponse,
    InspectRequest,
    InspectResponse,
    RunRequest,
    RunSummary,
)

app = FastAPI(title="amsf fusion service", version=__version__)

_ERROR_STATUS = {
    "config": 400,
    "io": 404,
    "numeric": 500,
}


def _error_response(kind: str, exc: Exception) -> JSONResponse:
    return JSONResponse(status_code=_ERROR_STATUS[kind],
                        content={"error_kind": kind, "message": str(exc)})


@app.exception_handler(ConfigError)
async def _config_error(request: Request, exc: ConfigError):
    return _error_response("config", exc)


@app.exception_handler(InputIOError)
async def _io_error(request: Request, exc: InputIOError):
    return _error_response("io", exc)


@app.exception_handler(OSError)
async def _os_error(request: Request, exc: OSError):
    return _error_response("io", exc)


@app.exception_handler(NumericError)
async def _numeric_error(request: Request, exc: NumericError):
    return _error_response("numeric", exc)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/experiments/run", response_model=RunSummary)
def experiments_run(req: RunRequest):
    cfg = load_config(req.config_path)
    return run_experiment(cfg, out_dir=req.out_dir, seed=req.seed)


@app.post("/experiments/ablate", response_model=AblateResponse)
def experiments_ablate(req: AblateRequest):
    cfg = load_config(req.config_path)
    return run_ablation_suite(cfg, out_dir=req.out_dir, seed=req.seed)


@app.post("/embeddings/encode", response_model=EncodeResponse)
def embeddings_encode(req: EncodeRequest):
    return encode_prompt(req.prompt, req.out_path, dim=req.dim,
                         tokens=req.tokens, seed=req.seed, name=req.name)


@app.post("/embeddings/inspect", response_model=InspectResponse)
def embeddings_inspect(req: InspectRequest):
    return {"path": req.path, "records": inspect_embeddings(req.path)}
