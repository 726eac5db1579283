"""Smoke test for the ab_spectra extension module.

Build and install the extension first, then run from the repository root:

    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
    python python/smoke_test.py
"""

import math

import ab_spectra as ab


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    spec = ab.PotentialSpec()
    numerics = ab.NumericsConfig(n_default=1000)
    assert spec.is_valid(), spec.violations()
    assert not ab.PotentialSpec(beta=0.5).is_valid()
    assert "border bound" in ab.PotentialSpec(beta=0.5).violations()

    assert ab.canonical_circulation(1.3) == 1.3 - 1.0
    assert ab.canonical_circulation(-0.5) == 0.5
    assert ab.is_gqr(0.3, 1.3) and not ab.is_gqr(0.3, 0.7)

    gs = ab.ground_state(0.25, spec, numerics)
    assert gs.mode_star == 0 and gs.multiplicity == 1
    assert len(gs.r) == len(gs.psi) == 1000
    assert math.isclose(sum(g * g for g in gs.g), 1.0, rel_tol=1e-12)
    hf = gs.hf_derivative()
    fd = ab.fd_derivative(0.25, 1e-4, spec, numerics)
    assert close(hf, fd, 1e-4), (hf, fd)
    assert gs.to_record().splitlines()[1].startswith("lambda1: ")

    mult, modes, energies = ab.degeneracy(0.5, spec, numerics)
    assert mult == 2 and modes == [0, 1], (mult, modes)
    try:
        ab.ground_state(0.0, spec, numerics).hf_derivative()
    except ValueError:
        pass
    else:
        raise AssertionError("derivative at an integer circulation should raise")

    s = ab.sweep(-0.5, 0.5, 11, spec, numerics)
    assert len(s["kappa"]) == 11 and s["deriv_hf"][5] is None
    lam = s["lambda1"]
    assert min(lam) == lam[5] and max(lam) in (lam[0], lam[10])
    csv = ab.sweep_csv(-0.5, 0.5, 11, spec, numerics)
    assert csv.startswith("kappa,lambda1,mode,deriv_hf,deriv_fd\n")
    assert len(csv.splitlines()) == 12

    ev = ab.lowest_k([2.0, 2.0], [-1.0], 2, 1e-12)
    assert abs(ev[0] - 1.0) < 1e-12 and abs(ev[1] - 3.0) < 1e-11

    c = ab.compare_with_radial(0.0, 100, 16, spec)
    assert c["discrepancy"] <= 1e-8, c

    study = ab.convergence_order(0.3, [500, 1000, 2000], spec)
    assert 1.7 <= study["order"] <= 2.3, study

    try:
        ab.compare_with_radial(0.3, 4, 16)
    except ValueError:
        pass
    else:
        raise AssertionError("tiny grid should be rejected")

    print("ab_spectra smoke test passed:", gs)


if __name__ == "__main__":
    main()
