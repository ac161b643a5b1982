import numpy as np
import pytest

from etgl.agent import (DdpgAgent, EpisodeRecord, actor_update, critic_target,
                        critic_update, load_checkpoint, process_episode,
                        save_checkpoint)
from etgl.replay import Transition

BOX = (np.array([-0.95, -0.95]), np.array([0.95, 0.95]))


def make_agent(seed=0, hidden=(8, 8)):
    return DdpgAgent(2, 2, BOX, hidden=hidden, rng=np.random.default_rng(seed))


def make_record(rewards, success, seed=0):
    rng = np.random.default_rng(seed)
    n = len(rewards)
    states = [rng.normal(size=2) for _ in range(n + 1)]
    actions = [rng.uniform(-0.95, 0.95, size=2) for _ in range(n)]
    return EpisodeRecord(states, actions, list(rewards), rng.normal(size=2), success)


def oracle_returns(rewards, gamma):
    """Direct summation sum_k gamma^k r_{t+k}, independent of the recursion."""
    n = len(rewards)
    return [sum(gamma ** (k - i) * rewards[k] for k in range(i, n)) for i in range(n)]


def test_process_episode_success_gamma_one():
    record = make_record([-1.0, -1.0, 10.0], success=True)
    ts = process_episode(record, gamma=1.0)
    assert [t.ret for t in ts] == [8.0, 9.0, 10.0]
    assert all(t.bootstrap == 0 for t in ts)
    assert [t.horizon for t in ts] == [3, 2, 1]
    for t in ts:
        np.testing.assert_array_equal(t.terminal_state, record.terminal_state)


def test_process_episode_matches_summation_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        rewards = list(rng.normal(size=n))
        success = bool(rng.integers(2))
        record = make_record(rewards, success, seed=int(rng.integers(1 << 30)))
        ts = process_episode(record, gamma=0.99)
        expected = oracle_returns(rewards, 0.99)
        for t, e in zip(ts, expected):
            assert t.ret == pytest.approx(e, abs=1e-12)


def test_process_episode_unsuccessful_flags():
    record = make_record([-1.0, -1.0, -1.0], success=False)
    ts = process_episode(record, gamma=0.99)
    assert all(t.bootstrap == 1 for t in ts)
    assert [t.horizon for t in ts] == [3, 2, 1]


def test_process_episode_one_step_mode():
    record = make_record([-1.0, -1.0, 10.0], success=True)
    ts = process_episode(record, gamma=0.99, longest=False)
    assert [t.ret for t in ts] == [-1.0, -1.0, 10.0]
    assert [t.bootstrap for t in ts] == [1, 1, 0]
    assert all(t.horizon == 1 for t in ts)
    for i, t in enumerate(ts):
        np.testing.assert_array_equal(t.terminal_state, record.states[i + 1])


def transition(ret, bootstrap, horizon, seed=0):
    rng = np.random.default_rng(seed)
    return Transition(rng.normal(size=2), rng.normal(size=2),
                      rng.uniform(-0.9, 0.9, size=2), ret,
                      rng.normal(size=2), bootstrap, horizon)


def test_critic_target_success_skips_critic():
    agent = make_agent()
    calls = {"n": 0}
    orig = agent.target_critic.forward

    def counting(*a, **k):
        calls["n"] += 1
        return orig(*a, **k)

    agent.target_critic.forward = counting
    batch = [transition(10.0, 0, 3, seed=i) for i in range(4)]
    y = critic_target(batch, agent)
    np.testing.assert_array_equal(y, [10.0] * 4)
    assert calls["n"] == 0


def test_critic_target_bootstrap_formula():
    agent = make_agent()
    t = transition(0.0, 1, 1, seed=3)
    a = agent.act_target_batch(t.terminal_state[None], t.goal[None])
    q = agent.target_critic.forward(
        np.concatenate([t.terminal_state, a[0], t.goal]))[0]
    y = critic_target([t], agent)
    assert y[0] == pytest.approx(0.99 * q, abs=1e-12)


def test_critic_target_matches_scalar_oracle():
    agent = make_agent(seed=4)
    rng = np.random.default_rng(9)
    batch = [transition(float(rng.normal()), int(rng.integers(2)),
                        int(rng.integers(1, 6)), seed=int(rng.integers(1 << 30)))
             for _ in range(16)]
    y = critic_target(batch, agent)
    for t, yi in zip(batch, y):
        expected = t.ret
        if t.bootstrap == 1:
            a = agent.target_actor.forward(np.concatenate([t.terminal_state, t.goal]))
            q = agent.target_critic.forward(
                np.concatenate([t.terminal_state, a, t.goal]))[0]
            expected += agent.gamma ** t.horizon * q
        assert yi == pytest.approx(expected, abs=1e-12)


def test_critic_target_single_gamma_flag():
    agent = make_agent()
    t = transition(0.0, 1, 5, seed=3)
    y_h = critic_target([t], agent, bootstrap_discount="horizon")
    y_s = critic_target([t], agent, bootstrap_discount="single")
    a = agent.act_target_batch(t.terminal_state[None], t.goal[None])
    q = agent.target_critic.forward(
        np.concatenate([t.terminal_state, a[0], t.goal]))[0]
    assert y_s[0] == pytest.approx(0.99 * q, abs=1e-12)
    assert y_h[0] == pytest.approx(0.99 ** 5 * q, abs=1e-12)


def test_critic_loss_nonnegative_and_gradient():
    agent = make_agent(seed=7, hidden=(6,))
    batch = [transition(float(i), 1, 1, seed=i) for i in range(3)]
    y = critic_target(batch, agent)
    x = np.concatenate([np.stack([t.state for t in batch]),
                        np.stack([t.action for t in batch]),
                        np.stack([t.goal for t in batch])], axis=1)

    def loss_fn():
        q = agent.critic.forward(x)[:, 0]
        return float(np.mean((y - q) ** 2))

    # finite-difference check of the loss gradient used by critic_update
    q, cache = agent.critic.forward(x, return_cache=True)
    upstream = (2.0 * (q[:, 0] - y) / len(batch))[:, None]
    wg, bg, _ = agent.critic.backward(x, upstream, cache=cache)
    h = 1e-5
    for p, g in zip(agent.critic.parameters(), wg + bg):
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            up = loss_fn()
            p[idx] = orig - h
            down = loss_fn()
            p[idx] = orig
            num = (up - down) / (2 * h)
            assert g[idx] == pytest.approx(num, rel=1e-4, abs=1e-7)
    loss = critic_update(agent, batch)
    assert loss >= 0.0


def test_actor_update_constant_critic_is_noop():
    agent = make_agent(seed=5)
    for w in agent.critic.weights:
        w[:] = 0.0
    for b in agent.critic.biases:
        b[:] = 0.0
    agent.critic.biases[-1][:] = 3.0  # Q == 3 regardless of action
    before = [p.copy() for p in agent.actor.parameters()]
    obj = actor_update(agent, [transition(0.0, 1, 1, seed=i) for i in range(4)])
    assert obj == pytest.approx(3.0)
    for p, q in zip(agent.actor.parameters(), before):
        np.testing.assert_array_equal(p, q)


def test_actor_composite_gradient_matches_finite_differences():
    agent = make_agent(seed=6, hidden=(6, 5))
    batch = [transition(0.0, 1, 1, seed=100 + i) for i in range(3)]
    s = np.stack([t.state for t in batch])
    g = np.stack([t.goal for t in batch])
    sg = np.concatenate([s, g], axis=1)

    def objective():
        a = agent.actor.forward(sg)
        q = agent.critic.forward(np.concatenate([s, a, g], axis=1))
        return float(np.mean(q))

    a, actor_cache = agent.actor.forward(sg, return_cache=True)
    x = np.concatenate([s, a, g], axis=1)
    _, _, x_grad = agent.critic.backward(
        x, np.full((3, 1), 1.0 / 3), cache=None)
    da = x_grad[:, 2:4]
    wg, bg, _ = agent.actor.backward(sg, da, cache=actor_cache)
    h = 1e-6
    for p, grad in zip(agent.actor.parameters(), wg + bg):
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            up = objective()
            p[idx] = orig - h
            down = objective()
            p[idx] = orig
            num = (up - down) / (2 * h)
            assert grad[idx] == pytest.approx(num, rel=1e-3, abs=1e-7)


def test_actor_update_increases_objective_on_smooth_critic():
    # tiny learning rate on a smooth critic: one step must improve the batch
    agent = DdpgAgent(2, 2, BOX, hidden=(8,), actor_lr=1e-4,
                      rng=np.random.default_rng(8))
    batch = [transition(0.0, 1, 1, seed=200 + i) for i in range(8)]
    s = np.stack([t.state for t in batch])
    g = np.stack([t.goal for t in batch])

    def objective():
        a = agent.actor.forward(np.concatenate([s, g], axis=1))
        return float(np.mean(agent.critic.forward(np.concatenate([s, a, g], axis=1))))

    before = objective()
    reported = actor_update(agent, batch)
    assert reported == pytest.approx(before)
    assert objective() > before


def test_longest_return_telescopes_for_gamma_one():
    # gamma=1, unsuccessful: y - Q'(s_T) == raw reward sum from t to end
    agent = make_agent(seed=9)
    agent.gamma = 1.0
    rewards = [-1.0, -2.0, -3.0]
    record = make_record(rewards, success=False, seed=4)
    ts = process_episode(record, gamma=1.0)
    y = critic_target(ts, agent)
    a = agent.act_target_batch(record.terminal_state[None], record.goal[None])
    q = agent.target_critic.forward(
        np.concatenate([record.terminal_state, a[0], record.goal]))[0]
    for i, t in enumerate(ts):
        assert y[i] - q == pytest.approx(sum(rewards[i:]), abs=1e-10)


def test_overestimation_direction_vs_one_step():
    # if the critic uniformly overestimates by c, the episode-end bootstrap
    # target is lower than the one-step target by c*(1 - gamma^(T-t-1)) margin
    gamma = 0.99
    c = 5.0
    rewards = [-1.0] * 6
    record = make_record(rewards, success=False, seed=11)
    long_ts = process_episode(record, gamma=gamma)
    one_ts = process_episode(record, gamma=gamma, longest=False)
    true_q = 0.0  # pretend the true continuation value is zero everywhere
    for i, (lt, ot) in enumerate(zip(long_ts, one_ts)):
        y_long = lt.ret + gamma ** lt.horizon * (true_q + c)
        y_one = ot.ret + gamma * (true_q + c)
        assert y_long <= y_one + 1e-12


def test_targets_converge_under_repeated_soft_update():
    agent = make_agent(seed=10)
    dist = lambda: sum(np.sum((a - b) ** 2) for a, b in zip(
        agent.actor.parameters(), agent.target_actor.parameters())) ** 0.5
    for p in agent.actor.parameters():
        p += 1.0
    d = dist()
    for _ in range(5):
        agent.update_targets()
        assert dist() == pytest.approx((1 - agent.tau) * d, rel=1e-9)
        d = dist()


def test_checkpoint_roundtrip(tmp_path):
    agent = make_agent(seed=12)
    path = tmp_path / "ck.txt"
    save_checkpoint(agent, path)
    loaded = load_checkpoint(path)
    x = np.array([0.1, -0.3, 0.5, 0.7])
    np.testing.assert_array_equal(loaded.actor.forward(x), agent.actor.forward(x))
    q_in = np.concatenate([x[:2], np.array([0.1, 0.1]), x[2:]])
    np.testing.assert_array_equal(loaded.critic.forward(q_in),
                                  agent.critic.forward(q_in))
    np.testing.assert_array_equal(loaded.target_actor.forward(x),
                                  agent.target_actor.forward(x))


def test_checkpoint_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("nonsense\n")
    with pytest.raises(ValueError):
        load_checkpoint(path)


def test_targets_start_as_copies():
    agent = make_agent(seed=13)
    x = np.array([0.2, 0.2, 0.3, 0.3])
    np.testing.assert_array_equal(agent.actor.forward(x),
                                  agent.target_actor.forward(x))
