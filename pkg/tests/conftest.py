import pytest

from vampire import builtin_profile


@pytest.fixture(scope="session")
def vendor_a():
    return builtin_profile("vendor_a")


@pytest.fixture(scope="session")
def vendor_b():
    return builtin_profile("vendor_b")


@pytest.fixture(scope="session")
def vendor_c():
    return builtin_profile("vendor_c")


@pytest.fixture(scope="session")
def all_vendors(vendor_a, vendor_b, vendor_c):
    return [vendor_a, vendor_b, vendor_c]
