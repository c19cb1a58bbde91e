import pytest


@pytest.fixture(scope="session")
def ball_433_session():
    from zeromass.shooting import shoot_ball

    return shoot_ball(4, 3, 1.0, 3, 1.0)


@pytest.fixture(scope="session")
def entire_433_session():
    from zeromass.shooting import shoot_entire

    return shoot_entire(4, 3, 3)


@pytest.fixture(scope="session")
def compact_state_session():
    from zeromass.shooting import shoot_entire

    return shoot_entire(1.5, 1.2, 10)


@pytest.fixture(scope="session")
def thresholds_343_session():
    from zeromass.nehari import estimate_lambda_star

    return estimate_lambda_star(3, 4, 3, 1.0)


@pytest.fixture(scope="session")
def min_branch_state_session(thresholds_343_session):
    from zeromass.nehari import minimize_ground_state

    lam = 1.1 * thresholds_343_session.lambda_E_star
    return minimize_ground_state(3, 4, 3, 1.0, lam)
