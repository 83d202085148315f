import numpy as np
import pytest

from wafassoc.null_model import CovariateMatrix, PhenotypeVector


def random_dataset(rng, n, K, binary, with_cov, maf=0.2):
    """Small random genotype/trait/covariate triple with no monomorphic columns."""
    while True:
        G = rng.binomial(2, maf, size=(n, K))
        if np.all(G.min(axis=0) != G.max(axis=0)):
            break
    C = rng.standard_normal((n, 1)) if with_cov else None
    eta = 0.3 * (G[:, 0] - G[:, 0].mean())
    if with_cov:
        eta = eta + 0.5 * C[:, 0]
    if binary:
        while True:
            y = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(float)
            if 0 < y.sum() < n:
                break
    else:
        y = eta + rng.standard_normal(n)
    Y = PhenotypeVector(y, "binary" if binary else "continuous")
    return G, Y, (CovariateMatrix(C) if with_cov else None)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_report(request):
    """Collects one verdict line per acceptance criterion, printed in the terminal summary."""
    return request.config.stash.setdefault(_ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        for line in lines[key]:
            terminalreporter.write_line(line)
