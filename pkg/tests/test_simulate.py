import numpy as np
import pytest

from levyfield.errors import InvalidInputError, ResourceLimitError
from levyfield.grids import symmetric_grid
from levyfield.model import SimpleKernel, field_char_fn, field_moments
from levyfield.simulate import (
    GridSample,
    SeedSpec,
    read_sample_csv,
    sample_cp_cell,
    sample_field,
    write_sample_csv,
)
from levyfield.ecf import compute_ecf


class TestCpCell:
    def test_tiny_volume_is_almost_surely_zero(self, gaussian_law):
        rng = SeedSpec(1).replication_rng(0)
        draws = np.array([sample_cp_cell(gaussian_law, 1e-9, rng) for _ in range(100_000)])
        frac = np.mean(draws != 0)
        assert frac < 1e-6 + 3 * np.sqrt(1e-9)

    def test_exponential_mean_wald(self, exponential_law):
        # E = volume * mass * E[jump] = 1
        rng = SeedSpec(2).replication_rng(0)
        draws = np.array([sample_cp_cell(exponential_law, 1.0, rng) for _ in range(20_000)])
        sd = draws.std(ddof=1)
        assert abs(draws.mean() - 1.0) <= 3 * sd / np.sqrt(len(draws))

    def test_gaussian_cp_moments(self, gaussian_law):
        rng = SeedSpec(3).replication_rng(0)
        draws = np.array([sample_cp_cell(gaussian_law, 1.0, rng) for _ in range(20_000)])
        n = len(draws)
        assert abs(draws.mean()) <= 3 / np.sqrt(n)  # var = lambda E[J^2] = 1
        assert abs(draws.var() - 1.0) <= 3 * np.sqrt(6.0 / n)

    def test_invalid_volume(self, gaussian_law):
        with pytest.raises(InvalidInputError):
            sample_cp_cell(gaussian_law, 0.0, SeedSpec(1).replication_rng(0))


class TestSampleField:
    def test_single_cell_kernel_iid(self, gaussian_law):
        k = SimpleKernel(coeffs=np.array([1.0]), offsets=np.array([[0, 0]]))
        s = sample_field(k, gaussian_law, (50, 50), SeedSpec(11))
        y = s.flat()
        # lag-1 sample correlation of an i.i.d. field is O(1/sqrt(N))
        a, b = s.values[:, :-1].ravel(), s.values[:, 1:].ravel()
        corr = np.corrcoef(a, b)[0, 1]
        assert abs(corr) <= 4 / np.sqrt(len(a))
        assert abs(y.var() - 1.0) <= 3 * np.sqrt(6.0 / len(y))

    def test_bench_variance(self, bench_kernel, gaussian_law):
        s = sample_field(bench_kernel, gaussian_law, (100, 100), SeedSpec(12))
        y = s.flat()
        mom = field_moments(bench_kernel, gaussian_law)
        n = len(y)
        sd_of_var = np.sqrt((mom["fourth"] - mom["var"] ** 2) / n)
        assert abs(y.var() - mom["var"]) <= 3 * sd_of_var

    def test_m_dependence(self, bench_kernel, gaussian_law):
        s = sample_field(bench_kernel, gaussian_law, (80, 80), SeedSpec(13))
        v = s.values
        m = bench_kernel.m_range
        assert m == 1
        for lag in (m + 1, m + 2):
            a = v[:, :-lag].ravel()
            b = v[:, lag:].ravel()
            corr = np.corrcoef(a, b)[0, 1]
            assert abs(corr) <= 4 / np.sqrt(len(a))

    def test_dependent_at_short_lag(self, bench_kernel, gaussian_law):
        # within the dependence range the overlap is real: correlation at
        # lag 1 is Var-normalised shared-cell mass, far above noise level
        s = sample_field(bench_kernel, gaussian_law, (80, 80), SeedSpec(14))
        v = s.values
        a, b = v[:, :-1].ravel(), v[:, 1:].ravel()
        assert np.corrcoef(a, b)[0, 1] > 0.05

    def test_reproducibility_bit_identical(self, bench_kernel, gaussian_law):
        s1 = sample_field(bench_kernel, gaussian_law, (30, 30), SeedSpec(99), rep=4)
        s2 = sample_field(bench_kernel, gaussian_law, (30, 30), SeedSpec(99), rep=4)
        assert np.array_equal(s1.values, s2.values)
        s3 = sample_field(bench_kernel, gaussian_law, (30, 30), SeedSpec(99), rep=5)
        assert not np.array_equal(s1.values, s3.values)

    def test_marginal_matches_model_charfn(self, bench_kernel, gaussian_law):
        s = sample_field(bench_kernel, gaussian_law, (100, 100), SeedSpec(2024))
        grid = symmetric_grid(3.0, 61)
        ecf = compute_ecf(s, grid)
        psi = field_char_fn(bench_kernel, gaussian_law, grid.nodes())
        assert np.max(np.abs(ecf.psi_hat - psi)) <= 5 / np.sqrt(s.n)

    def test_marginal_exponential(self, bench_kernel, exponential_law):
        s = sample_field(bench_kernel, exponential_law, (100, 100), SeedSpec(2025))
        grid = symmetric_grid(3.0, 61)
        ecf = compute_ecf(s, grid)
        psi = field_char_fn(bench_kernel, exponential_law, grid.nodes())
        assert np.max(np.abs(ecf.psi_hat - psi)) <= 5 / np.sqrt(s.n)

    def test_window_validation(self, bench_kernel, gaussian_law):
        with pytest.raises(InvalidInputError):
            sample_field(bench_kernel, gaussian_law, (0, 10), SeedSpec(1))
        with pytest.raises(InvalidInputError):
            sample_field(bench_kernel, gaussian_law, (10,), SeedSpec(1))

    def test_resource_budget(self, gaussian_law):
        k = SimpleKernel(coeffs=np.array([1.0]), offsets=np.array([[0, 0]]))
        with pytest.raises(ResourceLimitError, match="cells"):
            sample_field(k, gaussian_law, (100_000, 100_000), SeedSpec(1))

    def test_nonunit_volumes_rejected(self, gaussian_law):
        k = SimpleKernel(coeffs=np.array([1.0]), offsets=np.array([[0]]),
                         volumes=np.array([2.0]))
        with pytest.raises(InvalidInputError):
            sample_field(k, gaussian_law, (10,), SeedSpec(1))

    def test_integer_mesh_subsamples_the_lattice(self, bench_kernel, gaussian_law):
        full = sample_field(bench_kernel, gaussian_law, (21, 21), SeedSpec(8))
        coarse = sample_field(bench_kernel, gaussian_law, (11, 11), SeedSpec(8), mesh=2.0)
        assert coarse.window == (11, 11) and coarse.mesh == 2.0
        assert np.array_equal(coarse.values, full.values[::2, ::2])
        with pytest.raises(InvalidInputError):
            sample_field(bench_kernel, gaussian_law, (5, 5), SeedSpec(8), mesh=0.5)


class TestSampleCsv:
    def test_round_trip(self, bench_kernel, gaussian_law, tmp_path):
        s = sample_field(bench_kernel, gaussian_law, (7, 5), SeedSpec(5))
        path = tmp_path / "sample.csv"
        write_sample_csv(s, path)
        back = read_sample_csv(path)
        assert back.window == (7, 5)
        assert np.array_equal(back.values, s.values)

    def test_header_and_row_order(self, tmp_path):
        s = GridSample(np.arange(6.0).reshape(2, 3))
        path = tmp_path / "s.csv"
        write_sample_csv(s, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "j1,j2,value"
        assert lines[1].startswith("0,0,") and lines[2].startswith("0,1,")
