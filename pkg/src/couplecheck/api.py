"""HTTP front end: one POST endpoint per command, bodies are the service models.

Run with ``uvicorn couplecheck.api:app``. Responses always carry the exit code
the command line would return; only malformed JSON gives an HTTP error.
"""
from __future__ import annotations

from fastapi import FastAPI

from . import service as S

app = FastAPI(title="couplecheck", version="0.1.0")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/run", response_model=S.Response)
def run(req: S.ProgramRequest) -> S.Response:
    return S.handle_run(req)


@app.post("/lossless", response_model=S.Response)
def lossless(req: S.ProgramRequest) -> S.Response:
    return S.handle_lossless(req)


@app.post("/property", response_model=S.Response)
def prop(req: S.PropertyRequest) -> S.Response:
    return S.handle_property(req)


@app.post("/prove", response_model=S.Response)
def prove(req: S.ProveRequest) -> S.Response:
    return S.handle_prove(req)


@app.post("/selfcompose", response_model=S.Response)
def selfcompose(req: S.SelfComposeRequest) -> S.Response:
    return S.handle_selfcompose(req)


@app.post("/coupling", response_model=S.Response)
def coupling(req: S.CouplingRequest) -> S.Response:
    return S.handle_coupling(req)


@app.post("/corpus", response_model=S.Response)
def corpus(req: S.CorpusRequest) -> S.Response:
    return S.handle_corpus(req)
