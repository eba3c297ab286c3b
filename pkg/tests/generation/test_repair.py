"""Tests for boundary limitation and potential surge."""

import hypothesis.extra.numpy as npst
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from cptgen.core.metrics import cptgen_registry
from cptgen.generation.regression import CptBasis
from cptgen.generation.repair import RepairMethod, boundary_limitation, potential_surge, repair_basis


def basis_of(*columns: list[float]) -> CptBasis:
    entries = np.array(columns, dtype=np.float64).T
    m, n = entries.shape
    return CptBasis(tuple(f"z{i + 1}" for i in range(m)), tuple(f"x{j + 1}" for j in range(n)), entries)


@st.composite
def basis_column(draw, low, high):
    """A 2 to 6 entry column whose largest entry leads by more than 1e-6."""
    size = draw(st.integers(min_value=2, max_value=6))
    column = draw(
        npst.arrays(
            dtype=np.float64,
            shape=(size,),
            elements=st.floats(min_value=low, max_value=high, allow_nan=False, allow_infinity=False),
        )
    )
    ordered = np.sort(column)
    assume(ordered[-1] - ordered[-2] > 1e-6)
    return column


class TestBoundaryLimitation:
    """Clamp to [0, 1], then renormalize."""

    def test_clamp_and_normalize(self):
        repaired = boundary_limitation(basis_of([-0.2, -0.3, 0.4]))
        np.testing.assert_allclose(repaired.entries[:, 0], [0.0, 0.0, 1.0], atol=1e-15)

    def test_valid_column_unchanged(self):
        repaired = boundary_limitation(basis_of([0.2, 0.3, 0.5]))
        np.testing.assert_allclose(repaired.entries[:, 0], [0.2, 0.3, 0.5], atol=1e-15)

    def test_entries_above_one(self):
        repaired = boundary_limitation(basis_of([1.5, -0.5, 0.0]))
        np.testing.assert_allclose(repaired.entries[:, 0], [1.0, 0.0, 0.0])

    def test_all_negative_column_uses_surge(self):
        """An all-negative column is shifted instead of clamped to zero mass."""
        result = repair_basis(basis_of([-0.1, -0.2, -0.3]), RepairMethod.BOUNDARY_LIMITATION)
        np.testing.assert_allclose(result.cpt.entries[:, 0], [2 / 3, 1 / 3, 0.0], atol=1e-12)
        assert result.surge_fallback_columns == (0,)
        assert result.uniform_columns == ()

    def test_several_entries_above_one_tie(self):
        """(1.5, 1.2, −3) clamps to (1, 1, 0): the strict leader is lost."""
        repaired = boundary_limitation(basis_of([1.5, 1.2, -3.0]))
        np.testing.assert_allclose(repaired.entries[:, 0], [0.5, 0.5, 0.0])

    @given(basis_column(-10.0, 10.0))
    @settings(max_examples=100, deadline=None)
    def test_columns_are_stochastic(self, column):
        repaired = boundary_limitation(basis_of(column.tolist())).entries[:, 0]
        assert np.all((repaired >= 0.0) & (repaired <= 1.0))
        assert repaired.sum() == pytest.approx(1.0, abs=1e-9)

    @given(basis_column(-1.5, 1.5))
    @settings(max_examples=100, deadline=None)
    def test_clear_leader_is_kept(self, column):
        """A column whose clamped leader stands out keeps its most probable state."""
        ordered = np.sort(np.clip(column, 0.0, 1.0))
        assume(ordered[-1] - ordered[-2] > 1e-6)
        repaired = boundary_limitation(basis_of(column.tolist())).entries[:, 0]
        assert int(np.argmax(repaired)) == int(np.argmax(column))


class TestPotentialSurge:
    """Shift by the negative minimum, then renormalize."""

    def test_shift_and_normalize(self):
        """(−.2, −.3, .4) shifts by .3 and normalizes by .8."""
        repaired = potential_surge(basis_of([-0.2, -0.3, 0.4]))
        np.testing.assert_allclose(repaired.entries[:, 0], [0.125, 0.0, 0.875], atol=1e-12)

    def test_valid_column_unchanged(self):
        repaired = potential_surge(basis_of([0.25, 0.25, 0.5]))
        np.testing.assert_array_equal(repaired.entries[:, 0], [0.25, 0.25, 0.5])

    def test_nonnegative_column_is_normalized(self):
        repaired = potential_surge(basis_of([0.3, 0.3, 0.3]))
        np.testing.assert_allclose(repaired.entries[:, 0], [1 / 3, 1 / 3, 1 / 3], atol=1e-15)

    def test_all_equal_negative_column_becomes_uniform(self):
        """A column that shifts to all zeros is set uniform and flagged."""
        result = repair_basis(basis_of([-0.2, -0.2], [0.4, 0.6]), RepairMethod.POTENTIAL_SURGE)
        np.testing.assert_allclose(result.cpt.entries[:, 0], [0.5, 0.5])
        assert result.uniform_columns == (0,)

    @given(basis_column(-10.0, 10.0))
    @settings(max_examples=100, deadline=None)
    def test_properties(self, column):
        """Columns are stochastic and keep a clear most probable state."""
        repaired = potential_surge(basis_of(column.tolist())).entries[:, 0]
        assert np.all((repaired >= 0.0) & (repaired <= 1.0))
        assert repaired.sum() == pytest.approx(1.0, abs=1e-9)
        assert int(np.argmax(repaired)) == int(np.argmax(column))


class TestRepairResult:
    def test_report_fields(self):
        """Changed columns, largest change and pre-repair sum error are reported."""
        result = repair_basis(basis_of([0.2, 0.8], [-0.2, 1.2]), "boundary-limitation")
        assert result.method is RepairMethod.BOUNDARY_LIMITATION
        assert result.repaired_columns == (1,)
        assert result.max_change == pytest.approx(0.2)
        # clamped column 2 sums to 1.0 as well, so no sum error
        assert result.column_sum_error == pytest.approx(0.0)

    def test_column_sum_error(self):
        result = repair_basis(basis_of([0.5, 0.7]), RepairMethod.POTENTIAL_SURGE)
        assert result.column_sum_error == pytest.approx(0.2)

    def test_metrics_recorded(self):
        """Out-of-range columns are counted per method."""
        labels = {"method": "potential-surge", "action": "out_of_range"}
        before = cptgen_registry.get_sample_value("cptgen_repaired_columns_total", labels) or 0.0
        repair_basis(basis_of([-0.1, 1.1], [0.5, 0.5]), RepairMethod.POTENTIAL_SURGE)
        assert cptgen_registry.get_sample_value("cptgen_repaired_columns_total", labels) == before + 1

    def test_fallback_and_uniform_actions(self):
        """Surge fallbacks and uniform columns are counted under their own actions."""

        def sample(action: str) -> float:
            labels = {"method": "boundary-limitation", "action": action}
            return cptgen_registry.get_sample_value("cptgen_repaired_columns_total", labels) or 0.0

        before = {action: sample(action) for action in ("out_of_range", "surge_fallback", "uniform")}
        repair_basis(basis_of([-0.1, -0.2], [0.0, 0.0], [0.4, 0.6]), RepairMethod.BOUNDARY_LIMITATION)
        assert sample("out_of_range") == before["out_of_range"] + 1
        assert sample("surge_fallback") == before["surge_fallback"] + 1
        assert sample("uniform") == before["uniform"] + 1
        assert sample("clamp") == 0.0

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            repair_basis(basis_of([0.5, 0.5]), "rescale")
