from contextlib import asynccontextmanager

from fastapi import FastAPI
from loguru import logger

from app.api.v1.router import api_router
from app.core.logger import setup_logging
from app.schemas.command import COMMANDS
from app.schemas.reports import SCHEMA_VERSION

VERSION = "0.1.0"


@asynccontextmanager
async def lifespan(app: FastAPI):
    setup_logging()
    logger.info(f"rhgt API {VERSION} up with {len(COMMANDS)} commands")
    yield
    logger.info("rhgt API shutting down")


app = FastAPI(
    title="Relatively Hyperbolic Groups Toolkit",
    description="Runs rhgt commands over HTTP and returns the same JSON reports as the CLI.",
    version=VERSION,
    lifespan=lifespan,
)

app.include_router(api_router, prefix="/api/v1")


@app.get("/", tags=["Health Check"])
async def read_root():
    return {"status": "ok", "version": VERSION, "schema_version": SCHEMA_VERSION, "commands": list(COMMANDS)}
