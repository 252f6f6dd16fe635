from fractions import Fraction

import numpy as np

from hyperlim import rng


def test_mix64_reference_vectors():
    # first outputs of the splitmix64 stream for seeds 0 and 1
    assert rng.mix64(0, 0) == 0xE220A8397B1DCDAF
    assert rng.mix64(0, 1) == 0x6E789E6AA1B965F4
    assert rng.mix64(1, 0) == 0x910A2DEC89025CC1


def test_mix64_range_and_determinism():
    for key in (0, 1, 2**63, 2**64 - 1):
        for ctr in (0, 1, 17, 2**32):
            h = rng.mix64(key, ctr)
            assert 0 <= h < 2**64
            assert h == rng.mix64(key, ctr)


def test_u01_truncates_53_bits():
    for h in (0, 1, 2**63, 2**64 - 1, 0xDEADBEEFCAFEBABE):
        u = rng.u01(h)
        assert u == (h >> 11) * 2.0**-53
        assert 0.0 <= u < 1.0


def test_level_of_matches_exact_fraction():
    for l in (1, 2, 3, 5, 7, 64):
        for i in range(200):
            h = rng.mix64(42, i)
            lev = rng.level_of(h, l)
            assert lev == int(Fraction(h, 2**64) * l)
            assert 0 <= lev < l


def test_derive_order_sensitivity():
    assert rng.derive(3, 1, 2) != rng.derive(3, 2, 1)
    assert rng.derive(3, 1) != rng.derive(4, 1)
    assert rng.derive(7, rng.TAG_TRIAL, 3) == rng.derive(7, rng.TAG_TRIAL, 3)


def test_numpy_variants_match_scalar():
    ctrs = np.arange(1000, dtype=np.uint64)
    key = rng.derive(11, rng.TAG_MC)
    hs = rng.np_mix64(key, ctrs)
    for i in range(0, 1000, 37):
        assert int(hs[i]) == rng.mix64(key, i)
    us = rng.np_u01(hs)
    for i in range(0, 1000, 37):
        assert float(us[i]) == rng.u01(rng.mix64(key, i))
    for l in (2, 3, 10):
        levs = rng.np_level_of(hs, l)
        for i in range(0, 1000, 37):
            assert int(levs[i]) == rng.level_of(rng.mix64(key, i), l)


def test_u01_mean_sane():
    ctrs = np.arange(20000, dtype=np.uint64)
    us = rng.np_u01(rng.np_mix64(5, ctrs))
    # mean of 2e4 uniforms: stderr ~ 0.002
    assert abs(float(us.mean()) - 0.5) < 0.01


def test_level_of_uniform_over_levels():
    l = 8
    counts = np.bincount(rng.np_level_of(rng.np_mix64(9, np.arange(8000, dtype=np.uint64)), l), minlength=l)
    assert counts.sum() == 8000
    # each level ~1000, 4 sigma ~ 120
    assert np.all(np.abs(counts - 1000) < 150)
