"""Tree diagram endpoints: canonical forms, IHX, dimensions"""

from fastapi import APIRouter, HTTPException

from app.errors import TreeclaspError
from app.models.schemas import DimRequest, ErrorResponse, IhxRequest, TreeRequest, TreeVectorRequest
from app.services.calculator import ClasperCalculator

router = APIRouter(prefix="/api/v1/diagrams", tags=["Diagrams"])


@router.post("/canonical", responses={400: {"model": ErrorResponse}})
async def canonical_form(request: TreeRequest):
    """
    Canonical representative of a tree modulo AS

    Returns the sign relating the input to the representative (0 when the
    tree vanishes by antisymmetry), whether it vanishes in A^t, and a
    Graphviz rendering.
    """
    try:
        return ClasperCalculator().calculate_canonical(request.tree)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/eta", responses={400: {"model": ErrorResponse}})
async def eta(request: TreeRequest):
    """Free Lie algebra image of a tree in Lyndon coordinates"""
    try:
        return ClasperCalculator().calculate_eta(request.tree)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/ihx", responses={400: {"model": ErrorResponse}})
async def ihx(request: IhxRequest):
    """Rewrite a tree as the H plus X terms across an internal edge"""
    try:
        return ClasperCalculator().calculate_ihx(request.tree, tuple(request.edge))
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/is-zero", responses={400: {"model": ErrorResponse}})
async def is_zero(request: TreeVectorRequest):
    try:
        return ClasperCalculator().calculate_is_zero(request.vector)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/dim", responses={400: {"model": ErrorResponse}})
async def dimension(request: DimRequest):
    """
    Dimension of the degree-m tree space on r colors

    Computed by rank over Q of the AS/IHX relation span; the free Lie
    algebra rank is returned alongside as a cross-check.
    """
    try:
        return ClasperCalculator().calculate_dim(request.degree, request.colors)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))
