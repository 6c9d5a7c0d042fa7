"""Shared session fixtures: one prime table and one factor table at 10^7."""

import pytest

from mvlab.sieve import build_factor_table, sieve_primes

LIMIT = 10**7


@pytest.fixture(scope="session")
def pt():
    return sieve_primes(LIMIT)


@pytest.fixture(scope="session")
def ft():
    return build_factor_table(LIMIT)
