"""Transform, derivative, dealiasing and projection checks against
independent oracles (direct DFT, finite differences, direct convolution)."""

import numpy as np
import pytest

from amhd.grid import make_grid
from amhd.spectral import (
    SpectralField,
    VectorField,
    dealias,
    derivative,
    divergence,
    from_spectral,
    l2_norm_sq,
    leray_project,
    modal_divergence_residual,
    multiply,
    to_spectral,
    zero_field,
)


def direct_dft2(samples):
    """O(N^4) reference DFT with the mean normalization."""
    Nx, Ny = samples.shape
    out = np.zeros((Nx, Ny), dtype=complex)
    for nx in range(Nx):
        for ny in range(Ny):
            acc = 0.0 + 0.0j
            for ix in range(Nx):
                for iy in range(Ny):
                    acc += samples[ix, iy] * np.exp(
                        -2j * np.pi * (nx * ix / Nx + ny * iy / Ny)
                    )
            out[nx, ny] = acc / (Nx * Ny)
    return out


def single_mode(grid, nx, ny, amp=1.0):
    """Field amp * cos(2 pi nx x + 2 pi ny y / Ly) built from coefficients."""
    c = np.zeros(grid.shape, dtype=complex)
    c[nx % grid.Nx, ny % grid.Ny] = amp / 2.0
    c[-nx % grid.Nx, -ny % grid.Ny] += amp / 2.0
    return SpectralField(grid, c)


def random_field(grid, seed, band=None):
    rng = np.random.default_rng(seed)
    f = to_spectral(rng.standard_normal(grid.shape), grid)
    if band is not None:
        mask = (np.abs(grid.nx) <= band) & (np.abs(grid.ny) <= band)
        f = SpectralField(grid, f.coeffs * mask)
    return f


class TestGrid:
    def test_wavenumbers_8x8(self):
        g = make_grid(8, 8, 1.0)
        assert sorted(g.nx.ravel()) == [-4, -3, -2, -1, 0, 1, 2, 3]
        assert np.allclose(sorted(g.kx.ravel()), 2 * np.pi * np.arange(-4, 4))

    def test_ky_spacing_ly4(self):
        g = make_grid(8, 8, 4.0)
        ks = np.sort(g.ky.ravel())
        assert np.allclose(np.diff(ks), np.pi / 2)

    @pytest.mark.parametrize(
        "Nx,Ny,Ly",
        [(7, 8, 1.0), (8, 7, 1.0), (2, 8, 1.0), (8, 2, 1.0), (8, 8, 0.0), (8, 8, -1.0)],
    )
    def test_rejects_bad_sizes(self, Nx, Ny, Ly):
        with pytest.raises(ValueError):
            make_grid(Nx, Ny, Ly)


class TestTransforms:
    def test_constant_field_mean_normalization(self):
        g = make_grid(8, 8, 2.0)
        f = to_spectral(np.ones(g.shape), g)
        assert f.coeffs[0, 0] == pytest.approx(1.0)
        rest = f.coeffs.copy()
        rest[0, 0] = 0.0
        assert np.max(np.abs(rest)) < 1e-14

    def test_cosine_coefficients(self):
        g = make_grid(8, 8, 1.0)
        f = to_spectral(np.cos(2 * np.pi * g.x) * np.ones_like(g.y), g)
        assert f.coeffs[1, 0] == pytest.approx(0.5, abs=1e-14)
        assert f.coeffs[-1, 0] == pytest.approx(0.5, abs=1e-14)
        others = f.coeffs.copy()
        others[1, 0] = others[-1, 0] = 0.0
        assert np.max(np.abs(others)) < 1e-14

    def test_matches_direct_dft_and_roundtrip(self):
        g = make_grid(8, 8, 4.0)
        rng = np.random.default_rng(7)
        samples = rng.standard_normal(g.shape)
        f = to_spectral(samples, g)
        assert np.max(np.abs(f.coeffs - direct_dft2(samples))) < 1e-12
        back = from_spectral(f)
        assert np.max(np.abs(back - samples)) / np.max(np.abs(samples)) < 1e-12

    def test_shape_mismatch(self):
        g = make_grid(8, 8, 1.0)
        with pytest.raises(ValueError):
            to_spectral(np.zeros((8, 10)), g)

    def test_parseval(self):
        g = make_grid(16, 12, 3.0)
        rng = np.random.default_rng(3)
        samples = rng.standard_normal(g.shape)
        f = to_spectral(samples, g)
        modal = np.sum(np.abs(f.coeffs) ** 2)
        physical = np.mean(samples**2)
        assert modal == pytest.approx(physical, rel=1e-12)
        assert l2_norm_sq(f) == pytest.approx(g.Lx * g.Ly * physical, rel=1e-12)


class TestDerivative:
    def test_dx_cosine(self):
        g = make_grid(16, 8, 1.0)
        f = to_spectral(np.cos(2 * np.pi * g.x) * np.ones_like(g.y), g)
        df = from_spectral(derivative(f, "x"))
        expected = -2 * np.pi * np.sin(2 * np.pi * g.x) * np.ones_like(g.y)
        assert np.max(np.abs(df - expected)) < 1e-12 * 2 * np.pi

    def test_dyy_sine(self):
        g = make_grid(8, 16, 4.0)
        f = to_spectral(np.sin(2 * np.pi * g.y / g.Ly) * np.ones_like(g.x), g)
        d2f = from_spectral(derivative(f, "y", order=2))
        expected = -((2 * np.pi / g.Ly) ** 2) * np.sin(2 * np.pi * g.y / g.Ly)
        assert np.max(np.abs(d2f - expected * np.ones_like(g.x))) < 1e-10

    def test_against_finite_differences(self):
        # 6th-order central differences; halving h must shrink the FD error
        # by ~2^6, i.e. the spectral derivative is the limit it converges to.
        def fd6_x(values, dx):
            out = np.zeros_like(values)
            for shift, w in [(-3, -1 / 60), (-2, 3 / 20), (-1, -3 / 4),
                             (1, 3 / 4), (2, -3 / 20), (3, 1 / 60)]:
                out += w * np.roll(values, -shift, axis=0)
            return out / dx

        errs = []
        for N in (32, 64):
            g = make_grid(N, 8, 1.0)
            f = random_field(g, seed=11, band=4)
            exact = from_spectral(derivative(f, "x"))
            approx = fd6_x(from_spectral(f), g.dx)
            errs.append(np.max(np.abs(exact - approx)))
        assert errs[0] / errs[1] > 50  # observed order ~6

    def test_invalid_inputs(self):
        g = make_grid(8, 8, 1.0)
        f = zero_field(g)
        with pytest.raises(ValueError):
            derivative(f, "z")
        with pytest.raises(ValueError):
            derivative(f, "x", order=0)


class TestDealias:
    def test_low_mode_unchanged(self):
        g = make_grid(8, 8, 1.0)
        f = single_mode(g, 1, 0)
        assert np.array_equal(dealias(f).coeffs, f.coeffs)

    def test_cutoff_mode_zeroed(self):
        g = make_grid(8, 8, 1.0)  # Nx/3 = 2.67: |n_x| = 3 is dropped
        f = single_mode(g, 3, 0)
        assert np.max(np.abs(dealias(f).coeffs)) == 0.0

    def test_idempotent(self):
        g = make_grid(16, 16, 2.0)
        f = random_field(g, seed=5)
        once = dealias(f)
        assert np.array_equal(dealias(once).coeffs, once.coeffs)

    def test_commutes_with_derivative(self):
        g = make_grid(16, 16, 2.0)
        f = random_field(g, seed=9)
        a = dealias(derivative(f, "x"))
        b = derivative(dealias(f), "x")
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-14


class TestMultiply:
    def test_by_one(self):
        g = make_grid(16, 16, 1.0)
        f = random_field(g, seed=2)
        one = to_spectral(np.ones(g.shape), g)
        prod = multiply(f, one)
        assert np.max(np.abs(prod.coeffs - dealias(f).coeffs)) < 1e-13

    def test_cosine_squared(self):
        g = make_grid(16, 8, 1.0)
        f = to_spectral(np.cos(2 * np.pi * g.x) * np.ones_like(g.y), g)
        prod = multiply(f, f)
        expected = to_spectral(0.5 + 0.5 * np.cos(4 * np.pi * g.x) * np.ones_like(g.y), g)
        assert np.max(np.abs(prod.coeffs - expected.coeffs)) < 1e-13

    def test_against_direct_convolution(self):
        g = make_grid(8, 8, 2.0)
        f = random_field(g, seed=21)
        h = random_field(g, seed=22)

        # O(N^4) circular convolution of coefficient arrays, then the 2/3 cut.
        Nx, Ny = g.shape
        conv = np.zeros((Nx, Ny), dtype=complex)
        for ax in range(Nx):
            for ay in range(Ny):
                for bx in range(Nx):
                    for by in range(Ny):
                        conv[(ax + bx) % Nx, (ay + by) % Ny] += (
                            f.coeffs[ax, ay] * h.coeffs[bx, by]
                        )
        expected = conv * g.dealias_mask

        prod = multiply(f, h)
        assert np.max(np.abs(prod.coeffs - expected)) < 1e-12

    def test_grid_mismatch(self):
        f = random_field(make_grid(8, 8, 1.0), seed=1)
        h = random_field(make_grid(8, 8, 2.0), seed=1)
        with pytest.raises(ValueError):
            multiply(f, h)


class TestDivergence:
    def test_examples(self):
        g = make_grid(16, 16, 1.0)
        cos_y = to_spectral(np.cos(2 * np.pi * g.y) * np.ones_like(g.x), g)
        w = VectorField(cos_y, zero_field(g))
        assert np.max(np.abs(divergence(w).coeffs)) < 1e-13

        cos_x = to_spectral(np.cos(2 * np.pi * g.x) * np.ones_like(g.y), g)
        w = VectorField(cos_x, zero_field(g))
        div_phys = from_spectral(divergence(w))
        expected = -2 * np.pi * np.sin(2 * np.pi * g.x) * np.ones_like(g.y)
        assert np.max(np.abs(div_phys - expected)) < 1e-11

        sin_y = to_spectral(np.sin(2 * np.pi * g.y) * np.ones_like(g.x), g)
        sin_x = to_spectral(np.sin(2 * np.pi * g.x) * np.ones_like(g.y), g)
        w = VectorField(sin_y, sin_x)
        assert np.max(np.abs(divergence(w).coeffs)) < 1e-13


class TestLerayProjection:
    def test_kills_gradient(self):
        # band-limited phi: the Nyquist row is not a representable gradient
        g = make_grid(16, 16, 2.0)
        phi = random_field(g, seed=4, band=7)
        phi.coeffs[0, 0] = 0.0
        w = VectorField(derivative(phi, "x"), derivative(phi, "y"))
        p = leray_project(w)
        scale = np.max(np.abs(phi.coeffs)) * 2 * np.pi
        assert np.max(np.abs(p.x_comp.coeffs)) < 1e-12 * scale
        assert np.max(np.abs(p.y_comp.coeffs)) < 1e-12 * scale

    def test_fixes_divergence_free(self):
        g = make_grid(16, 16, 2.0)
        w = leray_project(
            VectorField(random_field(g, seed=6), random_field(g, seed=7))
        )
        p = leray_project(w)
        assert np.max(np.abs(p.x_comp.coeffs - w.x_comp.coeffs)) < 1e-14
        assert np.max(np.abs(p.y_comp.coeffs - w.y_comp.coeffs)) < 1e-14

    def test_mode_parallel_to_wavevector(self):
        # (cos 2pi x, 0) has its single mode at k = (+-2pi, 0), parallel to
        # itself: I - k k^T/|k|^2 sends it to zero.
        g = make_grid(16, 16, 1.0)
        cos_x = to_spectral(np.cos(2 * np.pi * g.x) * np.ones_like(g.y), g)
        p = leray_project(VectorField(cos_x, zero_field(g)))
        assert np.max(np.abs(p.x_comp.coeffs)) < 1e-14
        assert np.max(np.abs(p.y_comp.coeffs)) < 1e-14

    def test_idempotent_and_divergence_free(self):
        g = make_grid(16, 16, 4.0)
        w = VectorField(random_field(g, seed=8), random_field(g, seed=9))
        p = leray_project(w)
        pp = leray_project(p)
        assert np.max(np.abs(pp.x_comp.coeffs - p.x_comp.coeffs)) < 1e-13
        assert np.max(np.abs(pp.y_comp.coeffs - p.y_comp.coeffs)) < 1e-13
        assert modal_divergence_residual(p) < 1e-12

    def test_k0_passthrough(self):
        g = make_grid(8, 8, 1.0)
        wx = zero_field(g)
        wx.coeffs[0, 0] = 3.0
        p = leray_project(VectorField(wx, zero_field(g)))
        assert p.x_comp.coeffs[0, 0] == pytest.approx(3.0)
