"""FastAPI main application"""

import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.config import get_settings
from app.routers import aarhus, clasper, diagrams, freegroup

logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

app = FastAPI(
    title="treeclasp",
    description="Tree diagrams, claspers and tree-level gluing with exact rational arithmetic",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(diagrams.router)
app.include_router(freegroup.router)
app.include_router(clasper.router)
app.include_router(aarhus.router)


@app.get("/")
async def root():
    """Root endpoint - API information"""
    return {
        "name": "treeclasp",
        "version": __version__,
        "description": "Jacobi tree diagrams, free group calculus, claspers and gluing",
        "documentation": "/docs",
        "endpoints": {
            "diagrams": "/api/v1/diagrams",
            "freegroup": "/api/v1/freegroup",
            "clasper": "/api/v1/clasper",
            "aarhus": "/api/v1/aarhus",
        },
    }


@app.get("/health")
async def health_check():
    return {"status": "healthy", "service": "treeclasp"}


@app.get("/api/v1/limits")
async def limits():
    """Resource guards in effect (set via TREECLASP_* environment variables)"""
    return {"status": "success", "limits": get_settings().model_dump()}


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
