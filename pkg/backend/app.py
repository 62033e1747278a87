from fastapi import FastAPI, Request
from prometheus_fastapi_instrumentator import Instrumentator

from spikelab import __version__
from spikelab.logging_config import configure_logging, get_logger
from backend.routers.compute import router as compute_router
from backend.routers.reports import router as reports_router


def create_app() -> FastAPI:
    configure_logging()
    log = get_logger("app")
    app = FastAPI(title="spikelab API", version=__version__)

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        try:
            response = await call_next(request)
            log.info(
                "request",
                method=request.method,
                path=request.url.path,
                status_code=response.status_code,
                client=getattr(request.client, "host", None),
            )
            return response
        except Exception:
            log.exception("unhandled_error", method=request.method, path=request.url.path)
            raise

    app.include_router(compute_router, prefix="/api")
    app.include_router(reports_router, prefix="")
    Instrumentator().instrument(app).expose(app)
    return app


app = create_app()
