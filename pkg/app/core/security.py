import secrets

from fastapi import HTTPException, Security, status
from fastapi.security import APIKeyHeader
from loguru import logger

from app.core.config import settings

API_KEY_NAME = "X-API-KEY"
api_key_header = APIKeyHeader(name=API_KEY_NAME, auto_error=False)


async def verify_api_key(api_key: str | None = Security(api_key_header)) -> bool:
    """
    Checks the X-API-KEY header against settings.API_KEY. With no key
    configured the command endpoints are open (local desk use).
    """
    expected = settings.API_KEY
    if expected is None:
        return True
    if api_key is None or not secrets.compare_digest(api_key.encode(), expected.encode()):
        logger.warning("Rejected request with a missing or invalid API key")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Invalid or missing API Key",
        )
    return True
