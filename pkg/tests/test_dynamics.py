import numpy as np
import pytest

from tellurion.dynamics import (
    SEM_MOON_PERIOD,
    BodySpec,
    ExternalForce,
    PhysicalSystem,
    SingularityError,
    State,
    gravitational_accel,
    simulate,
    step,
    sun_earth_moon,
    total_energy,
)


def single_free_body(mass=1.0):
    return PhysicalSystem(bodies=(BodySpec("p", mass=mass),))


def circular_two_body(G=1.0, M=1.0, r=1.0):
    """Test particle on a circular orbit around a fixed central mass."""
    sys_ = PhysicalSystem(
        bodies=(
            BodySpec("center", mass=M, fixed=True),
            BodySpec("sat", mass=1.0, attractors=("center",)),
        ),
        G=G,
    )
    v = np.sqrt(G * M / r)
    init = State(0.0, [r, 0, 0], [0, v, 0])
    return sys_, init


def wrap_period(xy):
    """Time of first full revolution of a planar orbit via angle unwrap."""
    t, x, y = xy
    theta = np.unwrap(np.arctan2(y, x))
    theta -= theta[0]
    k = np.searchsorted(np.abs(theta), 2 * np.pi)
    # linear interpolation between bracketing samples
    th0, th1 = abs(theta[k - 1]), abs(theta[k])
    return t[k - 1] + (2 * np.pi - th0) / (th1 - th0) * (t[k] - t[k - 1])


class TestGravitationalAccel:
    def test_unit_circular_pull(self):
        sys_, init = circular_two_body()
        a = gravitational_accel(sys_, init)
        assert np.allclose(a, [-1.0, 0.0, 0.0])

    def test_zero_mass_attractor(self):
        sys_ = PhysicalSystem(
            bodies=(
                BodySpec("ghost", mass=0.0, fixed=True),
                BodySpec("sat", mass=1.0, attractors=("ghost",)),
            )
        )
        a = gravitational_accel(sys_, State(0.0, [1, 0, 0], [0, 0, 0]))
        assert np.allclose(a, 0.0)

    def test_moon_pull_magnitude(self):
        sys_ = PhysicalSystem(
            bodies=(
                BodySpec("earth", mass=1e-3, fixed=True),
                BodySpec("moon", mass=1.0, attractors=("earth",)),
            )
        )
        a = gravitational_accel(sys_, State(0.0, [0.05, 0, 0], [0, 0, 0]))
        assert np.linalg.norm(a) == pytest.approx(0.4)
        assert a[0] < 0  # toward the earth

    def test_singularity_raises(self):
        sys_, _ = circular_two_body()
        with pytest.raises(SingularityError) as ei:
            gravitational_accel(sys_, State(3.0, [0, 0, 0], [0, 0, 0]))
        assert ei.value.body == "sat"
        assert ei.value.attractor == "center"
        assert ei.value.t == 3.0


class TestStep:
    def test_free_body_at_rest(self):
        sys_ = single_free_body()
        s0 = State(0.0, [1, 2, 3], [0, 0, 0])
        s1 = step(sys_, s0, 0.1)
        assert s1.t == pytest.approx(0.1)
        assert np.array_equal(s1.q, s0.q)
        assert np.array_equal(s1.qdot, s0.qdot)

    def test_rk4_circular_radius(self):
        sys_, init = circular_two_body()
        s1 = step(sys_, init, 1e-3, "rk4")
        assert abs(np.linalg.norm(s1.q) - 1.0) < 1e-12

    def test_leapfrog_energy_over_period(self):
        sys_, init = circular_two_body()
        T = 2 * np.pi
        traj = simulate(sys_, init, T, T / 1000, method="leapfrog")
        e0 = total_energy(sys_, traj.state(0))
        e1 = total_energy(sys_, traj.state(len(traj) - 1))
        assert abs((e1 - e0) / e0) < 1e-6

    def test_bad_dt(self):
        sys_ = single_free_body()
        with pytest.raises(ValueError):
            step(sys_, State(0.0, [0, 0, 0], [0, 0, 0]), -0.1)


class TestSimulate:
    def test_circular_period_is_2pi(self):
        sys_, init = circular_two_body()
        traj = simulate(sys_, init, 1.2 * 2 * np.pi, 2 * np.pi / 2000)
        T = wrap_period((traj.times, traj.qs[:, 0], traj.qs[:, 1]))
        assert T == pytest.approx(2 * np.pi, rel=1e-3)

    def test_moon_period(self):
        sys_, init = sun_earth_moon()
        traj = simulate(sys_, init, 1.2 * SEM_MOON_PERIOD, SEM_MOON_PERIOD / 2000)
        relx = traj.qs[:, 3] - traj.qs[:, 0]
        rely = traj.qs[:, 4] - traj.qs[:, 1]
        T = wrap_period((traj.times, relx, rely))
        assert T == pytest.approx(2 * np.pi / np.sqrt(8), rel=1e-3)

    def test_impulse_outside_window_is_inert(self):
        sys_, init = sun_earth_moon()
        late = ExternalForce("moon", "impulse", (0, 1, 0), t_imp=100.0)
        ref = simulate(sys_, init, 1.0, 0.01)
        forced = simulate(sys_.with_external([late]), init, 1.0, 0.01)
        assert np.array_equal(ref.qs, forced.qs)
        assert np.array_equal(ref.qdots, forced.qdots)

    def test_impulse_applied_once_at_first_sample(self):
        sys_, init = sun_earth_moon()
        dp = np.array([0.0, 1e-4, 0.0])
        imp = ExternalForce("moon", "impulse", tuple(dp), t_imp=0.105)
        ref = simulate(sys_, init, 0.5, 0.01)
        forced = simulate(sys_.with_external([imp]), init, 0.5, 0.01)
        k = np.searchsorted(forced.times, 0.105)
        m = sys_.body("moon").mass
        # identical before, velocity jump dp/m on the moon slots at sample k
        assert np.array_equal(ref.qs[:k], forced.qs[:k])
        assert np.allclose(forced.qdots[k, 3:6] - ref.qdots[k, 3:6], dp / m)
        assert np.allclose(forced.qdots[k, 0:3], ref.qdots[k, 0:3])

    def test_last_partial_step(self):
        sys_ = single_free_body()
        traj = simulate(sys_, State(0.0, [0, 0, 0], [1, 0, 0]), 0.25, 0.1)
        assert traj.times[-1] == pytest.approx(0.25)
        assert traj.qs[-1, 0] == pytest.approx(0.25)

    def test_determinism(self):
        sys_, init = sun_earth_moon()
        a = simulate(sys_, init, 2.0, 0.01)
        b = simulate(sys_, init, 2.0, 0.01)
        assert np.array_equal(a.qs, b.qs)
        assert np.array_equal(a.qdots, b.qdots)

    def test_moon_perturbation_never_touches_earth(self):
        sys_, init = sun_earth_moon()
        imp = ExternalForce("moon", "impulse", (0, 0.01, 0), t_imp=0.5)
        ref = simulate(sys_, init, 2.0, 0.01)
        forced = simulate(sys_.with_external([imp]), init, 2.0, 0.01)
        assert np.array_equal(ref.qs[:, 0:3], forced.qs[:, 0:3])
        assert np.array_equal(ref.qdots[:, 0:3], forced.qdots[:, 0:3])


class TestTotalEnergy:
    def test_single_free_body(self):
        sys_ = single_free_body(mass=2.0)
        e = total_energy(sys_, State(0.0, [0, 0, 0], [3, 0, 0]))
        assert e == pytest.approx(0.5 * 2.0 * 9.0)

    def test_circular_orbit_vis_viva(self):
        sys_, init = circular_two_body()
        assert total_energy(sys_, init) == pytest.approx(-0.5)

    def test_leapfrog_no_secular_drift(self):
        sys_, init = sun_earth_moon()
        T = 2 * np.pi
        traj = simulate(sys_, init, 5 * T, T / 1000, method="leapfrog")
        es = np.array([total_energy(sys_, traj.state(k)) for k in range(0, len(traj), 50)])
        assert np.max(np.abs(es - es[0]) / abs(es[0])) < 1e-5


class TestCircularExactness:
    @pytest.mark.parametrize("G,M,r", [(1, 1, 1), (2, 0.5, 1.5), (1, 3, 0.3)])
    def test_radius_held_ten_periods(self, G, M, r):
        sys_, init = circular_two_body(G, M, r)
        T = 2 * np.pi * np.sqrt(r**3 / (G * M))
        traj = simulate(sys_, init, 10 * T, T / 1000)
        radii = np.linalg.norm(traj.qs[:, :3], axis=1)
        assert np.max(np.abs(radii - r)) < 1e-6 * r


class TestValidation:
    def test_self_attraction_rejected(self):
        with pytest.raises(ValueError):
            BodySpec("a", mass=1.0, attractors=("a",))

    def test_unknown_attractor_rejected(self):
        with pytest.raises(ValueError):
            PhysicalSystem(bodies=(BodySpec("a", mass=1.0, attractors=("b",)),))

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            BodySpec("a", mass=-1.0)
