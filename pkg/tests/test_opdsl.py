import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geneo import FunctionSpace, GridCircle, Group, GroupElement, builtin_function
from geneo.opdsl import (
    ElaborationError,
    ExprMp,
    ExprRot,
    ParseError,
    elaborate,
    parse,
    parse_operator,
    print_expr,
)
from geneo.operators import identity, power_mean, precompose

from conftest import random_function


@pytest.fixture
def space():
    return FunctionSpace.unit_lipschitz()


class TestParse:
    def test_identity(self, grid360):
        assert print_expr(parse("id", grid360)) == "id"

    def test_power_mean_of_rotation(self, grid360):
        expr = parse("Mp(1; id, rot(pi/2))", grid360)
        assert isinstance(expr, ExprMp)
        assert expr.p == 1.0
        assert isinstance(expr.children[1], ExprRot)
        assert expr.children[1].shift == 90

    def test_angle_forms(self, grid360):
        assert parse("rot(2pi/360)", grid360).shift == 1
        assert parse("rot(pi)", grid360).shift == 180
        assert parse("rot(3pi/4)", grid360).shift == 135
        assert parse("rot(0)", grid360).shift == 0
        assert parse("rot(2pi)", grid360).shift == 0

    def test_non_representable_angle(self, grid360):
        with pytest.raises(ParseError, match="multiple of 2pi/360"):
            parse("rot(pi/7)", grid360)

    def test_series(self, grid360):
        expr = parse("series(geom(0.5,0.5), rot-family(pi/2); eps=1e-9)", grid360)
        assert expr.c == 0.5 and expr.r == 0.5
        assert expr.family.shift == 90
        assert expr.epsilon == 1e-9

    def test_diagnostics_carry_position(self, grid360):
        with pytest.raises(ParseError) as err:
            parse("Mp(1: id)", grid360)
        assert err.value.position == 4
        assert ";" in err.value.expected

    def test_trailing_input(self, grid360):
        with pytest.raises(ParseError, match="trailing"):
            parse("id id", grid360)

    @pytest.mark.parametrize("text", [
        "id",
        "rot(pi/2)",
        "refl(0)",
        "unchecked Mp(0.5; id, rot(pi/2))",
        "Mp(3; id, rot(pi/2), compose(id, rot(pi)))",
        "L(max; id, rot(pi/2))",
        "L(proj:1; id, rot(pi))",
        "L(convex:0.25,0.5; id, id)",
        "series(geom(0.5,0.5), rot-family(pi/2); eps=1e-09)",
        "series(geom(0.25,0.5), const(Mp(2; id, id)); eps=1e-06)",
        "compose(Mp(1; id, rot(pi/2)), L(min; id, rot(pi)))",
    ])
    def test_print_parse_roundtrip(self, text, grid360):
        first = parse(text, grid360)
        assert parse(print_expr(first), grid360) == first

    @given(st.text(max_size=40))
    @settings(max_examples=300, deadline=None)
    def test_fuzz_no_crash(self, text):
        grid = GridCircle(360)
        try:
            parse(text, grid)
        except ParseError as err:
            assert 0 <= err.position <= len(text.encode() if False else text) + 1


class TestElaborate:
    def test_identity(self, rotations360, space, grid360):
        op = elaborate(parse("id", grid360), rotations360, space)
        assert op == identity(grid360)

    def test_power_mean_matches_direct_construction(self, rotations360, space,
                                                    grid360, abs_sin):
        op = parse_operator("Mp(1; id, rot(pi/2))", rotations360, space)
        direct = power_mean(1, [identity(grid360),
                                precompose(grid360, GroupElement(90))])
        assert op(abs_sin) == direct(abs_sin)

    def test_reflection_rejected_under_rotations(self, rotations360, space, grid360):
        with pytest.raises(ElaborationError, match="commute"):
            elaborate(parse("refl(0)", grid360), rotations360, space)

    def test_unchecked_reflection_allowed(self, rotations360, space, grid360):
        op = elaborate(parse("unchecked refl(0)", grid360), rotations360, space)
        assert not op.checked

    def test_low_p_rejected_unless_unchecked(self, rotations360, space, grid360):
        with pytest.raises(ElaborationError, match="p < 1"):
            elaborate(parse("Mp(0.5; id, rot(pi/2))", grid360), rotations360, space)
        op = elaborate(parse("unchecked Mp(0.5; id, rot(pi/2))", grid360),
                       rotations360, space)
        assert not op.checked

    def test_series_truncation_order(self, rotations360, space, grid360):
        op = parse_operator("series(geom(0.5,0.5), rot-family(pi/2); eps=1e-9)",
                            rotations360, space)
        # K solves 0.5^K <= 1e-9 / bound with bound = 1
        assert op.order == 30

    def test_compose_of_identities(self, rotations360, space, grid360):
        op = parse_operator("compose(id, id)", rotations360, space)
        rng = np.random.default_rng(0)
        f = random_function(rng, grid360)
        assert op(f) == f
