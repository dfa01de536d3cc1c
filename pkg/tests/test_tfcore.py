import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pzx.errors import DegreeZero, EvaluationAtPole, UnpairedComplexRoot, ZeroPolynomial
from pzx.tfcore import PoleZeroSet, Polynomial, RationalTF, eval_tf, from_pole_zero, poles_zeros, roots


def quad_roots(c0, c1, c2):
    disc = cmath.sqrt(c1 * c1 - 4 * c2 * c0)
    return sorted([(-c1 + disc) / (2 * c2), (-c1 - disc) / (2 * c2)], key=lambda z: (z.real, z.imag))


def close_sets(a, b, rtol, atol=0.0):
    a = sorted(a, key=lambda z: (round(z.real, 6), z.imag))
    b = sorted(b, key=lambda z: (round(z.real, 6), z.imag))
    return len(a) == len(b) and all(abs(x - y) <= atol + rtol * max(abs(y), 1.0) for x, y in zip(a, b))


class TestPolynomial:
    def test_trailing_zeros_stripped(self):
        p = Polynomial([1.0, 2.0, 0.0, 0.0])
        assert p.degree == 1
        assert list(p.coeffs) == [1.0, 2.0]

    def test_zero_polynomial(self):
        p = Polynomial([0.0, 0.0])
        assert p.is_zero and p.degree == 0

    def test_immutable(self):
        p = Polynomial([1.0, 2.0])
        with pytest.raises(ValueError):
            p.coeffs[0] = 5.0

    def test_rejects_complex(self):
        with pytest.raises(ValueError):
            Polynomial([1 + 1j, 1])


class TestEvalTF:
    def test_hp_at_corner(self):
        tf = RationalTF.from_coeffs([0, 1], [1e4, 1])
        assert abs(eval_tf(tf, 1e4j)) == pytest.approx(1 / math.sqrt(2), rel=1e-14)

    def test_constant(self):
        tf = RationalTF.from_coeffs([1], [1])
        assert eval_tf(tf, 3 + 4j) == 1

    def test_high_frequency_limit(self):
        tf = RationalTF.from_coeffs([0, 9652.54], [10000, 1])
        assert abs(eval_tf(tf, 1e12j)) == pytest.approx(9652.54, rel=1e-7)

    def test_at_pole(self):
        tf = RationalTF.from_coeffs([1], [0, 1])
        with pytest.raises(EvaluationAtPole):
            eval_tf(tf, 0)

    def test_vectorized(self):
        tf = RationalTF.from_coeffs([0, 1], [1e4, 1])
        out = eval_tf(tf, 1j * np.array([1e3, 1e4, 1e5]))
        assert out.shape == (3,)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_factored_form(self, seed):
        rng = np.random.default_rng(seed)
        zeros = list(rng.normal(size=2) * 10) + [complex(-1, 3), complex(-1, -3)]
        poles = [complex(-2, 5), complex(-2, -5), -7.0, -0.5]
        gain = float(rng.uniform(0.5, 3))
        tf = from_pole_zero(PoleZeroSet(poles, zeros, gain))
        s = complex(*rng.normal(size=2) * 4)
        direct = gain * np.prod([s - z for z in zeros]) / np.prod([s - p for p in poles])
        assert abs(eval_tf(tf, s) - direct) <= 1e-10 * abs(direct)


class TestRoots:
    def test_first_order(self):
        assert roots(Polynomial([10000, 1])) == [complex(-10000)]

    def test_monomial(self):
        assert roots(Polynomial([0, 1])) == [0j]

    def test_notch_denominator(self):
        got = roots(Polynomial([1e8, 1177.4, 1]))
        want = quad_roots(1e8, 1177.4, 1)
        assert close_sets(got, want, rtol=1e-12)
        assert got[1].real == pytest.approx(-588.7, abs=0.1)
        assert abs(got[1].imag) == pytest.approx(9982.6, abs=0.1)

    def test_zero_polynomial(self):
        with pytest.raises(ZeroPolynomial):
            roots(Polynomial([0]))

    def test_constant(self):
        with pytest.raises(DegreeZero):
            roots(Polynomial([3]))

    def test_multiplicity_kept(self):
        got = roots(Polynomial([0, 0, 1]))
        assert got == [0j, 0j]

    def test_residual_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            c = rng.normal(size=rng.integers(2, 12))
            p = Polynomial(c)
            for r in roots(p):
                scale = np.sum(np.abs(p.coeffs) * abs(r) ** np.arange(p.degree + 1))
                assert abs(p(r)) <= 1e-8 * scale

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3).filter(lambda v: v == 0 or abs(v) > 1e-6), min_size=2, max_size=11))
    def test_conjugate_closure(self, coeffs):
        p = Polynomial(coeffs)
        if p.degree < 1:
            return
        rts = roots(p)
        conj = sorted((r.conjugate() for r in rts), key=lambda z: (z.real, z.imag))
        assert sorted(rts, key=lambda z: (z.real, z.imag)) == conj


class TestPolesZeros:
    def test_first_order_highpass(self):
        pz = poles_zeros(RationalTF.from_coeffs([0, 9652.54], [10000, 1]))
        assert pz.zeros == (0j,)
        assert pz.poles == (complex(-10000),)
        assert pz.gain == 9652.54

    def test_constant(self):
        pz = poles_zeros(RationalTF.from_coeffs([5], [1]))
        assert pz.poles == () and pz.zeros == () and pz.gain == 5

    def test_notch(self):
        pz = poles_zeros(RationalTF.from_coeffs([1e8, 0, 1], [1e8, 1177.4, 1]))
        assert close_sets(pz.zeros, [1e4j, -1e4j], rtol=1e-12)
        assert close_sets(pz.poles, quad_roots(1e8, 1177.4, 1), rtol=1e-12)


class TestCanonicalForm:
    def test_monic_denominator(self):
        tf = RationalTF.from_coeffs([0, 2], [4, 2])
        assert list(tf.den.coeffs) == [2.0, 1.0]
        assert list(tf.num.coeffs) == [0.0, 1.0]

    def test_common_root_cancelled(self):
        tf = RationalTF.from_coeffs([1, 1], [1, 1])
        assert tf.num.degree == 0 and tf.den.degree == 0
        assert tf.num.coeffs[0] == pytest.approx(1.0)

    def test_partial_cancellation(self):
        # (s+1)(s+2) / ((s+1)(s+3)) -> (s+2)/(s+3)
        tf = RationalTF.from_coeffs([2, 3, 1], [3, 4, 1])
        assert np.allclose(tf.num.coeffs, [2, 1])
        assert np.allclose(tf.den.coeffs, [3, 1])

    def test_zero_denominator(self):
        with pytest.raises(ZeroPolynomial):
            RationalTF.from_coeffs([1], [0])


class TestFromPoleZero:
    def test_first_order_round_trip(self):
        tf = from_pole_zero(PoleZeroSet([-10000], [0], 9652.54))
        assert list(tf.num.coeffs) == [0.0, 9652.54]
        assert list(tf.den.coeffs) == [10000.0, 1.0]

    def test_empty(self):
        tf = from_pole_zero(PoleZeroSet([], [], 1))
        assert list(tf.num.coeffs) == [1.0] and list(tf.den.coeffs) == [1.0]

    def test_conjugate_pair(self):
        # (s+1-j)(s+1+j) = s^2 + 2s + 2
        tf = from_pole_zero(PoleZeroSet([-1 + 1j, -1 - 1j], [], 2))
        assert list(tf.num.coeffs) == [2.0]
        assert list(tf.den.coeffs) == [2.0, 2.0, 1.0]

    def test_unpaired(self):
        with pytest.raises(UnpairedComplexRoot):
            from_pole_zero(PoleZeroSet([-1 + 1j], [], 1))

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.tuples(st.floats(-1e4, -1), st.floats(1, 1e4)), max_size=3),
        st.lists(st.floats(-1e4, -1), max_size=3),
        st.lists(st.floats(-1e4, 1e4), max_size=3),
        st.floats(0.1, 100),
    )
    def test_round_trip(self, cpairs, preal, zreal, gain):
        poles = [complex(r, i) for r, i in cpairs] + [complex(r, -i) for r, i in cpairs] + preal
        zeros = zreal
        if len(zeros) > len(poles):
            zeros = zeros[: len(poles)]
        # keep roots separated so the round trip is well conditioned
        allr = poles + list(map(complex, zeros))
        for i, a in enumerate(allr):
            for b in allr[i + 1 :]:
                if abs(a - b) < 1e-2 * max(abs(a), abs(b), 1):
                    return
        pz = PoleZeroSet(poles, zeros, gain)
        back = poles_zeros(from_pole_zero(pz))
        scale = max([abs(r) for r in allr] + [1.0])
        assert close_sets(back.poles, pz.poles, rtol=0, atol=1e-8 * scale)
        assert close_sets(back.zeros, pz.zeros, rtol=0, atol=1e-8 * scale)
        assert back.gain == pytest.approx(gain, rel=1e-12)
