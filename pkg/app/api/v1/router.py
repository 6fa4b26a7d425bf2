from fastapi import APIRouter
from app.api.v1.endpoints import commands

api_router = APIRouter()
api_router.include_router(commands.router, prefix="/commands", tags=["Commands"])
