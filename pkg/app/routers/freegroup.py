"""Free group endpoints: Magnus expansion, Fox calculus, derived series"""

from fastapi import APIRouter, HTTPException

from app.errors import TreeclaspError
from app.models.schemas import DerivedRequest, ErrorResponse, FoxRequest, TreeExpansionRequest, WordRequest
from app.services.calculator import ClasperCalculator

router = APIRouter(prefix="/api/v1/freegroup", tags=["Free group"])


@router.post("/magnus", responses={400: {"model": ErrorResponse}})
async def magnus(request: WordRequest):
    """
    Magnus expansion of a word, truncated at `cap`

    Also reports the lower central series degree and exponent sums.
    """
    try:
        return ClasperCalculator().calculate_word(request.word, request.r, request.cap)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/tree-expansion", responses={400: {"model": ErrorResponse}})
async def tree_expansion(request: TreeExpansionRequest):
    """Rooted tree expansion of log(Magnus(w))"""
    try:
        return ClasperCalculator().calculate_tree_expansion(request.word, request.cap, request.root_label)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/fox", responses={400: {"model": ErrorResponse}})
async def fox(request: FoxRequest):
    """Fox derivative in the group ring of F/F^(level)"""
    try:
        return ClasperCalculator().calculate_fox(request.word, request.generator, request.level)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/derived", responses={400: {"model": ErrorResponse}})
async def derived(request: DerivedRequest):
    try:
        return ClasperCalculator().calculate_derived(request.word, request.n)
    except TreeclaspError as e:
        raise HTTPException(status_code=400, detail=str(e))
