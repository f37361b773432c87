import math
from collections import deque
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

from app.core import sl2
from app.core.config import get_settings
from app.core.errors import CertificationError, HypothesisError, McgError, VirtuallyAbelianError
from app.core.logger import logger
from app.models.certificate import (
    CertificateKind,
    FreeCertificate,
    IndependenceResult,
    PurifiedGenerators,
    RelationWord,
    SchreierGenerator,
    SearchConfig,
    UniformConstants,
)
from app.models.curves import ClassificationKind, MappingClass
from app.models.quadratic import QuadraticIrrational
from app.models.twist import TwistWord
from app.services.farey_service import FareyService
from app.services.twist_service import MIN_TWIST_POWER, TwistService

# a < A < b < B fixes which shortest relation is reported
_LETTER_ORDER = ("a", "A", "b", "B")
_INVERSE_LETTER = {"a": "A", "A": "a", "b": "B", "B": "b"}

# None stands for the point at infinity
Point = Optional[Fraction]
Interval = Tuple[Fraction, Fraction]

CASE_C_NOTE = ("case (c) of the main lemma is vacuous on the torus: no proper subsurface "
               "carries a pseudo-Anosov component")


def _mobius(m: sl2.Key, x: Point) -> Point:
    a, b, c, d = m
    if x is None:
        return None if c == 0 else Fraction(a, c)
    denominator = c * x + d
    if denominator == 0:
        return None
    return (a * x + b) / denominator


def _image_arc(m: sl2.Key, source: Interval) -> Optional[Interval]:
    """m(P¹∖source) as a bounded interval, or None when it passes through ∞."""
    left, right = source
    start, end = _mobius(m, right), _mobius(m, left)
    if start is None or end is None or not start < end:
        return None
    return start, end


def _maps_complement_into(m: sl2.Key, source: Interval, target: Interval) -> bool:
    """Whether m sends the closed arc P¹ minus `source` into the open interval `target`."""
    image = _image_arc(m, source)
    return image is not None and target[0] < image[0] and image[1] < target[1]


def _interval_around(x: QuadraticIrrational, scale: int) -> Interval:
    # at least 1/scale of room on both sides of x
    n = (x * scale).floor()
    return Fraction(n - 1, scale), Fraction(n + 2, scale)


def _reduce(word: List[int]) -> List[int]:
    reduced: List[int] = []
    for letter in word:
        if reduced and reduced[-1] == -letter:
            reduced.pop()
        else:
            reduced.append(letter)
    return reduced


class FreeCertService:
    """Rank-2 free subgroup certificates and the short independent word pipeline."""

    @staticmethod
    def relation_oracle(a: MappingClass, b: MappingClass, depth: int) -> Optional[RelationWord]:
        """
        Shortest freely reduced word of length <= depth evaluating to ±I.

        Words are walked as a prefix tree in the letter order a, A, b, B, so
        among the shortest relations the lexicographically least is returned.

        Args:
            a: first generator
            b: second generator
            depth: maximal word length

        Returns:
            RelationWord, or None when no relation exists up to `depth`
        """
        if depth < 1:
            raise HypothesisError("oracle depth must be at least 1")
        letters = {
            "a": a.matrix,
            "A": sl2.inv(a.matrix),
            "b": b.matrix,
            "B": sl2.inv(b.matrix),
        }
        best: Optional[List[str]] = None
        word: List[str] = []

        def walk(prefix: sl2.Mat, last: Optional[str]) -> None:
            nonlocal best
            if len(word) >= depth:
                return
            for name in _LETTER_ORDER:
                if last is not None and name == _INVERSE_LETTER[last]:
                    continue
                current = prefix * letters[name]
                word.append(name)
                if sl2.is_central(current):
                    if best is None or len(word) < len(best):
                        best = list(word)
                elif best is None or len(word) + 1 < len(best):
                    walk(current, name)
                word.pop()

        walk(sl2.identity(), None)
        if best is None:
            return None
        relation = RelationWord(letters=best)
        logger.info(f"Relation found: {relation.text}", extra={"operation": "relation_oracle"})
        return relation

    @classmethod
    def oracle_certificate(cls, a: MappingClass, b: MappingClass, depth: int) -> Optional[FreeCertificate]:
        if cls.relation_oracle(a, b, depth) is not None:
            return None
        return FreeCertificate(kind=CertificateKind.ORACLE_ONLY, generators=(a, b),
                               parameters={"depth": depth}, oracle_depth=depth)

    @staticmethod
    def projective_pingpong_cert(a: MappingClass, b: MappingClass,
                                 precision_max: Optional[int] = None) -> FreeCertificate:
        """
        Ping-pong on the projective line for two hyperbolic matrices.

        For each dyadic precision 2^-j, U_g- is a rational interval around the
        repelling fixed point of g and U_g+ is the image arc g(P¹∖U_g-), padded
        by 4^-j. Then g sends the complement of U_g- into U_g+ and g⁻¹ sends the
        complement of U_g+ into U_g-; both are rechecked with exact arithmetic.
        Once the four intervals are disjoint, X_a = U_a+ ∪ U_a- and
        X_b = U_b+ ∪ U_b- satisfy a^k(X_b) ⊂ X_a and b^k(X_a) ⊂ X_b for every k != 0.

        Raises:
            HypothesisError: a or b is not pseudo-Anosov
            CertificationError: no precision on the ladder separates the intervals
        """
        precision_max = get_settings().PRECISION_LADDER_MAX if precision_max is None else precision_max
        for name, m in (("a", a), ("b", b)):
            if FareyService.classify(m).kind != ClassificationKind.PSEUDO_ANOSOV:
                raise HypothesisError(f"{name} = {m} is not pseudo-Anosov")

        a_attract, a_repel = FareyService.fixed_points(a)
        b_attract, b_repel = FareyService.fixed_points(b)
        points = {"a+": a_attract, "a-": a_repel, "b+": b_attract, "b-": b_repel}
        if len(set(points.values())) < 4:
            raise CertificationError("axes share an endpoint: fixed points are not distinct",
                                     {"fixed_points": {k: str(v) for k, v in points.items()}})

        reason = "fixed points too close for disjoint rational neighborhoods"
        for bits in range(1, precision_max + 1):
            scale = 2 ** bits
            pad = Fraction(1, scale * scale)
            intervals: Dict[str, Interval] = {}
            for name, g in (("a", a.entries), ("b", b.entries)):
                repelling = _interval_around(points[f"{name}-"], scale)
                image = _image_arc(g, repelling)
                if image is None:
                    break
                intervals[f"{name}-"] = repelling
                intervals[f"{name}+"] = (image[0] - pad, image[1] + pad)
            if len(intervals) < 4:
                reason = f"pole outside the repelling interval at precision 2^-{bits}"
                continue

            ordered = sorted(intervals.values())
            if any(ordered[i][1] >= ordered[i + 1][0] for i in range(3)):
                reason = f"intervals overlap at precision 2^-{bits}"
                continue

            conditions = {
                "a(P¹∖U_a-) ⊂ U_a+": _maps_complement_into(a.entries, intervals["a-"], intervals["a+"]),
                "a⁻¹(P¹∖U_a+) ⊂ U_a-": _maps_complement_into(a.inverse().entries, intervals["a+"], intervals["a-"]),
                "b(P¹∖U_b-) ⊂ U_b+": _maps_complement_into(b.entries, intervals["b-"], intervals["b+"]),
                "b⁻¹(P¹∖U_b+) ⊂ U_b-": _maps_complement_into(b.inverse().entries, intervals["b+"], intervals["b-"]),
            }
            if not all(conditions.values()):
                raise McgError("constructed ping-pong intervals fail their own mapping check: "
                               + ", ".join(k for k, ok in conditions.items() if not ok))

            logger.info(f"Certificate issued: projective ping-pong for {a}, {b} at precision 2^-{bits}",
                        extra={"operation": "projective_pingpong_cert"})
            return FreeCertificate(
                kind=CertificateKind.PROJECTIVE_PINGPONG,
                generators=(a, b),
                parameters={
                    "precision_bits": bits,
                    "fixed_points": {k: v.to_json() for k, v in points.items()},
                    "intervals": {f"U_{k}": [str(lo), str(hi)] for k, (lo, hi) in sorted(intervals.items())},
                    "X_a": "U_a+ ∪ U_a-",
                    "X_b": "U_b+ ∪ U_b-",
                    "conditions": list(conditions),
                },
            )
        raise CertificationError(reason, {"precision_max": precision_max,
                                          "fixed_points": {k: str(v) for k, v in points.items()}})

    @staticmethod
    def purify(generators: List[MappingClass]) -> PurifiedGenerators:
        """
        Schreier generators of ⟨A⟩ ∩ Γ, Γ the level-3 congruence kernel.

        Cosets are the images of ⟨A⟩ in SL(2, Z/3); the transversal is built
        breadth-first over A and A⁻¹ so each representative has minimal A-length.

        Args:
            generators: the set A

        Returns:
            PurifiedGenerators with index [⟨A⟩ : ⟨A⟩ ∩ Γ] and the pure Schreier generators
        """
        if not generators:
            raise HypothesisError("generating set must be nonempty")
        mats = [g.matrix for g in generators]
        letters = []
        for i, m in enumerate(mats, start=1):
            letters.append((i, m))
            letters.append((-i, sl2.inv(m)))

        transversal: Dict[sl2.Key, Tuple[sl2.Mat, List[int]]] = {sl2.IDENTITY_KEY: (sl2.identity(), [])}
        queue = deque([sl2.IDENTITY_KEY])
        while queue:
            image = queue.popleft()
            representative, word = transversal[image]
            for letter, m in letters:
                element = representative * m
                key = sl2.mod(element, 3)
                if key not in transversal:
                    transversal[key] = (element, word + [letter])
                    queue.append(key)

        index = len(transversal)
        schreier: List[SchreierGenerator] = []
        seen = set()
        for image, (representative, word) in transversal.items():
            for i, m in enumerate(mats, start=1):
                target_rep, target_word = transversal[sl2.mod(representative * m, 3)]
                element = sl2.key(sl2.product([representative, m, sl2.inv(target_rep)]))
                if element == sl2.IDENTITY_KEY or element in seen:
                    continue
                seen.add(element)
                full_word = _reduce(word + [i] + [-x for x in reversed(target_word)])
                schreier.append(SchreierGenerator(element=MappingClass.from_tuple(element),
                                                  a_length=len(full_word), word=full_word))

        for generator in schreier:
            if not FareyService.is_pure(generator.element) or generator.a_length > 2 * index - 1:
                raise McgError(f"Schreier generator {generator.element} breaks purification bounds")

        logger.info(f"Purified {len(generators)} generators: index {index}, {len(schreier)} Schreier generators",
                    extra={"operation": "purify"})
        return PurifiedGenerators(originals=list(generators), index=index, schreier=schreier)

    @staticmethod
    def theorem1_constants(p: int, index: int) -> UniformConstants:
        """w = 3p·(2·index - 1) and r = (log 3)/w."""
        if p < 1 or index < 1:
            raise HypothesisError("p and index must be positive")
        w = 3 * p * (2 * index - 1)
        return UniformConstants(p=p, index=index, w=w, r_symbolic=f"log(3)/{w}", r_decimal=math.log(3) / w)

    @staticmethod
    def _select_pair(pure: List[SchreierGenerator]) -> Optional[Tuple[SchreierGenerator, SchreierGenerator]]:
        ranked = sorted(combinations(range(len(pure)), 2),
                        key=lambda ij: (max(pure[ij[0]].a_length, pure[ij[1]].a_length),
                                        pure[ij[0]].a_length + pure[ij[1]].a_length, ij))
        for i, j in ranked:
            if not pure[i].element.commutes_with(pure[j].element):
                return pure[i], pure[j]
        return None

    @classmethod
    def find_short_independent(cls, generators: List[MappingClass],
                               config: Optional[SearchConfig] = None) -> IndependenceResult:
        """
        Short independent words in a generating set.

        Purifies A, picks a noncommuting pure pair (a, b) and dispatches:
        a pseudo-Anosov member gives ⟨a^p, b a^p b⁻¹⟩ certified on the projective
        line; two Dehn twists give ⟨a^p, b^p⟩ with twist powers of magnitude >= 4.
        p ascends from 1 and every certificate is cross-checked by the oracle.

        Raises:
            VirtuallyAbelianError: every pair of pure generators commutes
            CertificationError: nothing certified up to config.max_power
        """
        if config is None:
            settings = get_settings()
            config = SearchConfig(max_power=settings.MAX_POWER, oracle_depth=settings.ORACLE_DEPTH,
                                  sample_box=settings.SAMPLE_BOX, precision_max=settings.PRECISION_LADDER_MAX)

        purified = cls.purify(generators)
        pair = cls._select_pair(purified.schreier)
        if pair is None:
            raise VirtuallyAbelianError()

        first, second = pair
        kind_first = FareyService.classify(first.element)
        kind_second = FareyService.classify(second.element)
        if kind_first.kind != ClassificationKind.PSEUDO_ANOSOV and kind_second.kind == ClassificationKind.PSEUDO_ANOSOV:
            first, second = second, first
            kind_first, kind_second = kind_second, kind_first

        logger.info(f"Searching free pair from {first.element} and {second.element}",
                    extra={"operation": "find_short_independent"})
        if kind_first.kind == ClassificationKind.PSEUDO_ANOSOV:
            found = cls._pseudo_anosov_case(first, second, config)
        elif kind_first.kind == kind_second.kind == ClassificationKind.DEHN_TWIST:
            found = cls._twist_case(first, second, kind_first, kind_second, config)
        else:
            raise HypothesisError(f"pure elements {first.element}, {second.element} are neither twists nor pseudo-Anosov")

        case, p, u, v, u_length, v_length, certificate = found
        if cls.relation_oracle(u, v, config.oracle_depth) is not None:
            raise McgError(f"certified pair {u}, {v} has a relation within depth {config.oracle_depth}")
        certificate.oracle_depth = config.oracle_depth

        d = max(u_length, v_length)
        return IndependenceResult(
            u=u,
            v=v,
            u_length=u_length,
            v_length=v_length,
            certificate=certificate,
            growth_bound=math.log(3) / d,
            case=case,
            p_used=p,
            index=purified.index,
            pure_pair=(first, second),
            uniform=cls.theorem1_constants(p, purified.index),
            notes=[CASE_C_NOTE, "lengths are A-lengths of the Schreier expressions"],
        )

    @classmethod
    def _pseudo_anosov_case(cls, a: SchreierGenerator, b: SchreierGenerator, config: SearchConfig):
        failures = {}
        for p in range(1, config.max_power + 1):
            u = a.element.power(p)
            v = u.conjugate_by(b.element)
            try:
                certificate = cls.projective_pingpong_cert(u, v, config.precision_max)
            except CertificationError as e:
                failures[p] = str(e)
                continue
            return "a", p, u, v, p * a.a_length, 2 * b.a_length + p * a.a_length, certificate
        raise CertificationError(f"no certified power up to {config.max_power}",
                                 {"case": "a", "failures": failures})

    @classmethod
    def _twist_case(cls, a: SchreierGenerator, b: SchreierGenerator, kind_a, kind_b, config: SearchConfig):
        start = max(math.ceil(MIN_TWIST_POWER / abs(kind_a.power)), math.ceil(MIN_TWIST_POWER / abs(kind_b.power)))
        sample = TwistService.slope_box(config.sample_box)
        failures = {}
        for p in range(start, config.max_power + 1):
            word_a = TwistWord.single(kind_a.axis, kind_a.power * p)
            word_b = TwistWord.single(kind_b.axis, kind_b.power * p)
            outcome = TwistService.verify_twist_pingpong(word_a, word_b, sample, config.sample_powers)
            if isinstance(outcome, FreeCertificate):
                u, v = a.element.power(p), b.element.power(p)
                return "b", p, u, v, p * a.a_length, p * b.a_length, outcome
            failures[p] = outcome.model_dump(mode="json")
        raise CertificationError(f"no certified power up to {config.max_power}",
                                 {"case": "b", "failures": failures})
