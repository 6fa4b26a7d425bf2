from fastapi import APIRouter, Depends, HTTPException
from loguru import logger
from datetime import datetime

from app.core.exceptions import RhgtError
from app.core.security import verify_api_key
from app.schemas.command import CommandSpec
from app.schemas.reports import CommandReport
from app.services.command_service import run_command

router = APIRouter()

@router.post(
    "/{name}",
    response_model=CommandReport,
    status_code=200,
    dependencies=[Depends(verify_api_key)]
)
def execute_command(name: str, spec: CommandSpec):
    """
    Runs one rhgt command and returns its report. The path name must match
    `spec.command`; the group is given inline (`group_config`) or as a path
    readable by the server (`group`). Requires the 'X-API-KEY' header when
    an API key is configured.

    Args:
        name (str): The subcommand, as on the command line.
        spec (CommandSpec): The command arguments.
    """
    if spec.command != name:
        raise HTTPException(status_code=400, detail=f"path command '{name}' does not match body command '{spec.command}'")
    try:
        timenow = datetime.now()
        report = run_command(spec)
        logger.info(f"{name} finished with exit code {report.exit_code}. Took {(datetime.now() - timenow).total_seconds():.2f} seconds")
        return report
    except RhgtError as e:
        logger.warning(f"{name} rejected: {e}")
        raise HTTPException(status_code=400, detail=f"{type(e).__name__}: {e}")
    except Exception as e:
        logger.exception(f"An error occurred while running {name}: {e}")
        raise HTTPException(
            status_code=500,
            detail="An internal server error occurred while running the command."
        )
