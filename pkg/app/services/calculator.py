"""Orchestration service shared by the HTTP routers and the CLI"""

import logging
from typing import Dict, Optional, Union

from app.config import Settings, get_settings
from app.models.schemas import (
    CertificateModel,
    ClasperSpecModel,
    GluingResultModel,
    LeggedSeriesModel,
    PatternModel,
    PatternReport,
    SurgeryPresentationModel,
    TreeModel,
    TreeVectorModel,
    ZminReportModel,
    frac_str,
    parse_frac,
)
from app.services import aarhus, clasper, diagrams, freegroup
from app.services.lie import bracket_to_string, lyndon_bracket, lyndon_reduce

logger = logging.getLogger(__name__)

AnyPattern = Union[clasper.Pattern, clasper.NPattern]


def dump(model) -> Dict:
    return model.model_dump(mode="json", by_alias=True)


class ClasperCalculator:
    """Calculation wrapper: takes validated request models, returns
    JSON-ready dicts"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    # --- diagrams ---

    def calculate_canonical(self, tree_model: TreeModel) -> Dict:
        tree = tree_model.to_tree()
        sign, rep = diagrams.canonicalize(tree)
        return {
            "status": "success",
            "degree": tree.degree,
            "sign": sign,
            "vanishes_by_as": sign == 0,
            "vanishes": diagrams.is_zero(tree),
            "canonical": dump(TreeModel.from_tree(rep)),
            "dot": diagrams.to_dot(rep),
        }

    def calculate_eta(self, tree_model: TreeModel) -> Dict:
        tree = tree_model.to_tree()
        coords = lyndon_reduce(diagrams.eta(tree))
        return {
            "status": "success",
            "eta": [
                {"color": color, "bracket": bracket_to_string(lyndon_bracket(word)), "coeff": frac_str(c)}
                for (color, word), c in sorted(coords.items())
            ],
        }

    def calculate_ihx(self, tree_model: TreeModel, edge) -> Dict:
        tree = tree_model.to_tree()
        resolved = diagrams.ihx_resolve(tree, edge)
        return {
            "status": "success",
            "resolved": dump(TreeVectorModel.from_vector(resolved)),
            "identity_holds": diagrams.is_zero(diagrams.TreeVector.from_tree(tree) - resolved),
        }

    def calculate_is_zero(self, vector_model: TreeVectorModel) -> Dict:
        vector = vector_model.to_vector()
        return {"status": "success", "is_zero": diagrams.is_zero(vector), "terms": len(vector)}

    def calculate_dim(self, degree: int, colors: int) -> Dict:
        count, rel_rank = diagrams.relation_span_rank(degree, colors, self.settings)
        return {
            "status": "success",
            "degree": degree,
            "colors": colors,
            "dim": count - rel_rank,
            "trees": count,
            "relation_rank": rel_rank,
            "eta_rank": diagrams.eta_rank(degree, colors, self.settings),
        }

    # --- free group ---

    def calculate_word(self, text: str, r: Optional[int] = None, cap: int = 3) -> Dict:
        word = freegroup.parse_word(text, r)
        series = freegroup.magnus(word, cap)
        return {
            "status": "success",
            "word": freegroup.word_to_string(word),
            "length": len(word),
            "magnus": series.to_string(),
            "cap": cap,
            "lcs_degree": str(freegroup.lcs_degree(word, cap)),
            "exponent_sums": freegroup.exponent_sums(word, r),
        }

    def calculate_tree_expansion(self, text: str, cap: int, root_label="root") -> Dict:
        word = freegroup.parse_word(text)
        expansion = freegroup.tree_expansion(word, cap, root_label)
        return {
            "status": "success",
            "word": freegroup.word_to_string(word),
            "expansion": dump(TreeVectorModel.from_vector(expansion)),
        }

    def calculate_fox(self, text: str, generator: int, level: int) -> Dict:
        word = freegroup.parse_word(text)
        derivative = freegroup.fox_derivative(word, generator, level, self.settings)
        return {
            "status": "success",
            "word": freegroup.word_to_string(word),
            "generator": generator,
            "level": level,
            "derivative": derivative.to_string(),
            "terms": derivative.to_pairs(),
        }

    def calculate_derived(self, text: str, n: int) -> Dict:
        word = freegroup.parse_word(text)
        return {
            "status": "success",
            "word": freegroup.word_to_string(word),
            "n": n,
            "in_derived": freegroup.in_derived(word, n, self.settings),
            "normal_form": freegroup.solvable_normal_form(word, n, self.settings).to_dict() if n else None,
        }

    # --- claspers ---

    def resolve_pattern(self, model: PatternModel) -> AnyPattern:
        tree = model.tree.to_tree()
        if model.n:
            return clasper.validate_n_pattern(tree, model.n, model.edge, self.settings)
        return clasper.validate_pattern(tree, model.vertex)

    def validate(self, model: PatternModel) -> PatternReport:
        pattern = self.resolve_pattern(model)
        if isinstance(pattern, clasper.NPattern):
            branches = [diagrams.ColoredTree.from_rooted("*", b).to_text() for b in pattern.branches]
            return PatternReport(
                valid=True, kind=f"{pattern.n}-pattern", degree=pattern.degree, n=pattern.n,
                edge=pattern.edge, branches=branches, tree=TreeModel.from_tree(pattern.tree),
            )
        branches = [t.to_tree("*").to_text() for t in clasper.split(pattern)]
        return PatternReport(
            valid=True, kind="pattern", degree=pattern.degree, vertex=pattern.vertex,
            branches=branches, tree=TreeModel.from_tree(pattern.tree),
        )

    def build(self, model: PatternModel, allow_non_null: bool = False) -> SurgeryPresentationModel:
        """Clasper, surgery presentation and null certificate for a pattern"""
        pattern = self.resolve_pattern(model)
        reduced = None
        if isinstance(pattern, clasper.NPattern):
            reduced = clasper.reduce_to_degree_one(clasper.build_n_clasper(pattern))
            presentation = clasper.compile_surgery(reduced, allow_non_null)
            level = pattern.n
        else:
            presentation = clasper.compile_surgery(clasper.build_clasper(pattern), allow_non_null)
            level = 1
        clasper.certify_null(presentation, level, self.settings)
        out = SurgeryPresentationModel.from_presentation(presentation)
        if reduced is not None:
            out.reduced = ClasperSpecModel.from_spec(reduced)
        return out

    def build_spec(self, spec_model: ClasperSpecModel, allow_non_null: bool = False) -> SurgeryPresentationModel:
        spec = spec_model.to_spec()
        expanded = clasper.expand_edges(spec)
        presentation = clasper.compile_expanded(expanded, allow_non_null)
        return SurgeryPresentationModel.from_presentation(presentation)

    def certify(self, presentation_model: SurgeryPresentationModel, level: int) -> CertificateModel:
        presentation = presentation_model.to_presentation()
        return CertificateModel.from_certificate(clasper.certify_null(presentation, level, self.settings))

    def catalog(self, degree: int, colors: int, n: Optional[int] = None) -> Dict:
        if n:
            found = clasper.n_pattern_catalog(degree, colors, n, self.settings)
        else:
            found = clasper.pattern_catalog(degree, colors, self.settings)
        return {
            "status": "success",
            "degree": degree,
            "colors": colors,
            "n": n,
            "count": len(found),
            "patterns": [p.tree.to_text() for p in found],
        }

    # --- integration ---

    def zmin(self, model: PatternModel, cap: Optional[int] = None, route: str = "reduce",
             oracle: bool = False) -> aarhus.ZminReport:
        pattern = self.resolve_pattern(model)
        return aarhus.zmin(pattern, cap=cap, route=route, oracle=oracle, settings=self.settings)

    def calculate_zmin(self, model: PatternModel, cap: Optional[int] = None, route: str = "reduce",
                       oracle: bool = False) -> Dict:
        report = self.zmin(model, cap, route, oracle)
        return {"status": "success", "report": dump(ZminReportModel.from_report(report))}

    def glue(self, series_model: LeggedSeriesModel, brute: bool = False) -> GluingResultModel:
        series = series_model.to_series()
        result = aarhus.brute_glue(series, self.settings) if brute else aarhus.glue(series, self.settings)
        return GluingResultModel.from_result(result)

    def calculate_negative_inverse(self, matrix) -> Dict:
        rows = [[parse_frac(x) for x in row] for row in matrix]
        inverse = aarhus.negative_inverse(rows)
        return {"status": "success", "negative_inverse": [[frac_str(x) for x in row] for row in inverse.entries]}
