"""Goal-conditioned DDPG agent, episode processing, and the training loop.

The critic target uses the accumulated episode return: for goal-reaching
episodes it is the pure Monte Carlo return (no critic query at all), and
otherwise the partial return plus a discounted bootstrap from the target
critic at the episode's final state.
"""

import copy
import csv
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .config import substream
from .envs import make_env
from .explore import (ActionSelector, EpsilonSchedule, generate_option_buffer,
                      generate_option_model, random_action)
from .hashing import CountTable, ModelBuffer, SimHasher, StepTransition
from .nn import AdamState, Network, adam_step, soft_update
from .replay import (FifoBuffer, ReservoirBuffer, Transition, draw_minibatches,
                     sampling_split)

CHECKPOINT_MAGIC = "# etgl checkpoint v1"
METRICS_COLUMNS = ["step", "episode", "success_rate", "coverage", "epsilon",
                   "mean_episode_return", "dbeta_size", "de_size"]


class DdpgAgent:
    """Actor mu(s,g), critic Q(s,a,g), and their target copies.

    Follows the usual estimator conventions: fit() is driven by the
    training loop below, predict() returns the greedy action.
    """

    def __init__(self, state_dim, goal_dim, action_box, hidden=(128, 128, 128),
                 gamma=0.99, tau=0.01, actor_lr=1e-4, critic_lr=1e-3, rng=None):
        low, high = action_box
        self.action_dim = len(high)
        self.action_box = (np.asarray(low, float), np.asarray(high, float))
        self.gamma = gamma
        self.tau = tau
        self.actor = Network(state_dim + goal_dim, self.action_dim, hidden,
                             output_activation=("tanh", np.asarray(high, float)), rng=rng)
        self.critic = Network(state_dim + self.action_dim + goal_dim, 1, hidden,
                              rng=rng)
        self.target_actor = self.actor.clone()
        self.target_critic = self.critic.clone()
        self.actor_opt = AdamState(self.actor, actor_lr)
        self.critic_opt = AdamState(self.critic, critic_lr)
        self.state_dim = state_dim
        self.goal_dim = goal_dim

    def act(self, state, goal):
        return self.actor.forward(np.concatenate([state, goal]))

    predict = act

    def act_target_batch(self, states, goals):
        return self.target_actor.forward(np.concatenate([states, goals], axis=1))

    def get_params(self):
        return {"gamma": self.gamma, "tau": self.tau,
                "state_dim": self.state_dim, "goal_dim": self.goal_dim,
                "hidden": self.actor.hidden,
                "actor_lr": self.actor_opt.learning_rate,
                "critic_lr": self.critic_opt.learning_rate}

    def update_targets(self):
        soft_update(self.target_actor, self.actor, self.tau)
        soft_update(self.target_critic, self.critic, self.tau)


@dataclass
class EpisodeRecord:
    """states has one more entry than actions/rewards; the last is terminal."""

    states: list
    actions: list
    rewards: list
    goal: np.ndarray
    success: bool

    def __len__(self):
        return len(self.actions)

    @property
    def terminal_state(self):
        return self.states[-1]


def process_episode(record, gamma, longest=True):
    """Turn an episode into replay transitions.

    longest: accumulated return to episode end, bootstrap flag 0 on
    success; otherwise plain one-step transitions.
    """
    n = len(record)
    out = []
    if longest:
        bootstrap = 0 if record.success else 1
        ret = 0.0
        for i in range(n - 1, -1, -1):
            ret = record.rewards[i] + gamma * ret
            out.append(Transition(record.states[i], record.goal, record.actions[i],
                                  ret, record.terminal_state, bootstrap, n - i))
        out.reverse()
    else:
        for i in range(n):
            last_and_success = record.success and i == n - 1
            out.append(Transition(record.states[i], record.goal, record.actions[i],
                                  record.rewards[i], record.states[i + 1],
                                  0 if last_and_success else 1, 1))
    return out


def _stack_batch(batch):
    s = np.stack([t.state for t in batch])
    g = np.stack([t.goal for t in batch])
    a = np.stack([t.action for t in batch])
    ret = np.array([t.ret for t in batch])
    s_t = np.stack([t.terminal_state for t in batch])
    boot = np.array([t.bootstrap for t in batch])
    horizon = np.array([t.horizon for t in batch])
    return s, g, a, ret, s_t, boot, horizon


def critic_target(batch, agent, bootstrap_discount="horizon", stacked=None):
    """y = R + bootstrap * gamma^horizon * Q'(s_T, mu'(s_T,g), g).

    Rows with bootstrap == 0 never touch the critic.
    """
    _, g, _, ret, s_t, boot, horizon = stacked or _stack_batch(batch)
    y = ret.copy()
    mask = boot == 1
    if np.any(mask):
        s_m, g_m = s_t[mask], g[mask]
        a_m = agent.act_target_batch(s_m, g_m)
        q = agent.target_critic.forward(np.concatenate([s_m, a_m, g_m], axis=1))[:, 0]
        exponent = horizon[mask] if bootstrap_discount == "horizon" else 1
        y[mask] += agent.gamma ** exponent * q
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite critic targets")
    return y


def critic_update(agent, batch, bootstrap_discount="horizon", stacked=None):
    """One Adam step on the mean squared Bellman error; returns the loss."""
    stacked = stacked or _stack_batch(batch)
    y = critic_target(batch, agent, bootstrap_discount, stacked=stacked)
    s, g, a, *_ = stacked
    x = np.concatenate([s, a, g], axis=1)
    q, cache = agent.critic.forward(x, return_cache=True)
    err = q[:, 0] - y
    loss = float(np.mean(err ** 2))
    upstream = (2.0 * err / len(batch))[:, None]
    wg, bg, _ = agent.critic.backward(x, upstream, cache=cache)
    adam_step(agent.critic, wg, bg, agent.critic_opt)
    return loss


def actor_update(agent, batch, stacked=None):
    """Ascend mean Q(s, mu(s,g), g); critic frozen. Returns the objective."""
    s, g, *_ = stacked or _stack_batch(batch)
    sg = np.concatenate([s, g], axis=1)
    a, actor_cache = agent.actor.forward(sg, return_cache=True)
    x = np.concatenate([s, a, g], axis=1)
    q, critic_cache = agent.critic.forward(x, return_cache=True)
    objective = float(np.mean(q))
    upstream = np.full((len(batch), 1), 1.0 / len(batch))
    _, _, x_grad = agent.critic.backward(x, upstream, cache=critic_cache)
    da = x_grad[:, s.shape[1]:s.shape[1] + agent.action_dim]
    wg, bg, _ = agent.actor.backward(sg, da, cache=actor_cache)
    # gradient ascent: feed Adam the negated gradients
    adam_step(agent.actor, [-g_ for g_ in wg], [-g_ for g_ in bg], agent.actor_opt)
    return objective


class _SingleBuffer:
    """Plain FIFO replay for the non-dual-buffer variants."""

    def __init__(self, capacity):
        self.storage = deque(maxlen=capacity)

    def insert(self, transition):
        self.storage.append(transition)

    def __len__(self):
        return len(self.storage)


# -- training loop ---------------------------------------------------------


@dataclass
class TrainState:
    """Everything a run mutates, bundled for the loop and for eval hooks."""

    env: object
    agent: DdpgAgent
    selector: ActionSelector
    hasher: object
    counts: CountTable
    model_buffer: object
    coverage: object
    d_beta: object
    d_e: object
    single: object
    global_step: int = 0
    episode: int = 0
    returns_window: list = field(default_factory=list)


def _make_option_source(cfg, state_bundle, rng):
    env, hasher, counts, model_buffer = state_bundle
    if cfg.model_source == "perfect":
        def generate(s):
            return generate_option_model(s, hasher, counts, env.model_transition,
                                         env.action_box, cfg.budget, rng)
    else:
        def generate(s):
            return generate_option_buffer(s, hasher, counts, model_buffer,
                                          cfg.budget, rng)
    return generate


def evaluate(agent, env, episodes, rng):
    """Greedy rollouts; returns (success_rate, mean_return)."""
    eval_env = copy.deepcopy(env)
    successes = 0
    returns = []
    low, high = eval_env.action_box
    for _ in range(episodes):
        s, g = eval_env.reset(rng)
        total = 0.0
        done = eval_env.is_goal(s)
        success = done
        while not done:
            a = np.clip(agent.act(s, g), low, high)
            s, r, done, success = eval_env.step(s, a)
            total += r
        successes += int(success)
        returns.append(total)
    return successes / episodes, float(np.mean(returns)) if returns else float("nan")


def train(cfg, out_dir=None, progress=None):
    """Full training run; writes metrics CSV + checkpoint, returns paths."""
    cfg = cfg.resolved()
    out_dir = out_dir or cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    metrics_path = os.path.join(out_dir, "metrics.csv")
    checkpoint_path = os.path.join(out_dir, "checkpoint.txt")
    with open(os.path.join(out_dir, "config.txt"), "w") as f:
        f.write(cfg.to_text())

    env = make_env(cfg.env)
    env_rng = substream(cfg.seed, "env")
    explorer_rng = substream(cfg.seed, "explorer")
    nets_rng = substream(cfg.seed, "nets")
    replay_rng = substream(cfg.seed, "replay")

    agent = DdpgAgent(env.state_dim, 2, env.action_box, hidden=cfg.hidden,
                      gamma=cfg.gamma, tau=cfg.tau, actor_lr=cfg.actor_lr,
                      critic_lr=cfg.critic_lr, rng=nets_rng)
    mid = (env.bounds[0] + env.bounds[1]) / 2.0
    half = (env.bounds[1] - env.bounds[0]) / 2.0
    hasher = SimHasher(env.state_dim, cfg.hash_k, nets_rng,
                       preprocess=lambda s: (s - mid) / half,
                       with_offsets=True)
    counts = CountTable()
    model_buffer = ModelBuffer(hasher, cfg.bucket_capacity)
    coverage = env.coverage_grid(cfg.coverage_cell, cfg.coverage_threshold)
    schedule = EpsilonSchedule(1.0, cfg.epsilon_decay, cfg.epsilon_floor)
    selector = ActionSelector(cfg.explore, schedule, cfg.budget, env.action_box)
    generate = _make_option_source(cfg, (env, hasher, counts, model_buffer),
                                   explorer_rng)
    if cfg.uses_gdrb():
        d_beta = ReservoirBuffer(cfg.exploration_buffer_size)
        d_e = FifoBuffer(cfg.exploitation_buffer_size)
        single = None
    else:
        d_beta = d_e = None
        single = _SingleBuffer(cfg.single_buffer_size)

    total_episodes = max(cfg.total_frames // env.max_steps, 1)
    st = TrainState(env, agent, selector, hasher, counts, model_buffer,
                    coverage, d_beta, d_e, single)
    checkpoint_idx = 0

    def write_row(writer):
        nonlocal checkpoint_idx
        checkpoint_idx += 1
        eval_rng = substream(cfg.seed, "eval", checkpoint_idx)
        success_rate, _ = evaluate(agent, env, cfg.eval_episodes, eval_rng)
        mean_ret = (float(np.mean(st.returns_window))
                    if st.returns_window else float("nan"))
        st.returns_window.clear()
        writer.writerow([st.global_step, st.episode, repr(success_rate),
                         repr(coverage.fraction()), repr(schedule.epsilon),
                         repr(mean_ret),
                         len(d_beta) if d_beta is not None else len(single),
                         len(d_e) if d_e is not None else 0])

    with open(metrics_path, "w", newline="") as f:
        f.write("# etgl metrics v1\n")
        f.write(f"# scale_factor {repr(cfg.scale_factor)}\n")
        writer = csv.writer(f)
        writer.writerow(METRICS_COLUMNS)
        def on_step():
            st.global_step += 1
            st.selector.schedule.decay()
            if st.global_step % cfg.checkpoint_interval == 0:
                write_row(writer)
                f.flush()

        while st.global_step < cfg.total_frames:
            record = _run_training_episode(cfg, st, generate, env_rng,
                                           explorer_rng, on_step)
            st.episode += 1
            if len(record) > 0:
                st.returns_window.append(float(np.sum(record.rewards)))
                _store_episode(cfg, st, record, replay_rng)
            if st.global_step > cfg.warmup:
                _update_networks(cfg, st, total_episodes, replay_rng)
            if progress is not None:
                progress(st)
        if cfg.total_frames % cfg.checkpoint_interval != 0:
            write_row(writer)  # partial final interval still gets a row
    save_checkpoint(agent, checkpoint_path)
    return {"metrics": metrics_path, "checkpoint": checkpoint_path,
            "final_coverage": coverage.fraction(), "state": st}


def _run_training_episode(cfg, st, generate, env_rng, explorer_rng, on_step):
    env, selector, agent = st.env, st.selector, st.agent
    s, g = env.reset(env_rng)
    selector.reset()
    code = st.hasher.hash(s)
    st.counts.record_visit(code)
    st.coverage.update(s)
    states, actions, rewards = [s], [], []
    success = env.is_goal(s)
    done = success
    while not done and st.global_step < cfg.total_frames:
        if st.global_step < cfg.warmup:
            a = random_action(env.action_box, explorer_rng)
        else:
            a = selector.select(s, g, agent.act, explorer_rng,
                                generate_option=generate)
        nxt, r, done, success = env.step(s, a)
        if cfg.explore == "etgreedy" and cfg.model_source == "buffer":
            st.model_buffer.insert(StepTransition(s, a, r, nxt),
                                   st.hasher.hash(s), explorer_rng)
        st.counts.record_visit(st.hasher.hash(nxt))
        st.coverage.update(nxt)
        states.append(nxt)
        actions.append(a)
        rewards.append(r)
        s = nxt
        on_step()
    return EpisodeRecord(states, actions, rewards, g, success)


def _store_episode(cfg, st, record, replay_rng):
    transitions = process_episode(record, cfg.gamma,
                                  longest=cfg.uses_longest_nstep())
    if cfg.uses_gdrb():
        for t in transitions:
            st.d_beta.insert(t, replay_rng)
            if t.bootstrap == 0:
                st.d_e.insert(t)
    else:
        for t in transitions:
            st.single.insert(t)


def _update_networks(cfg, st, total_episodes, replay_rng):
    if cfg.uses_gdrb():
        if len(st.d_beta) == 0:
            return
        split = sampling_split(st.episode, total_episodes, cfg.updates_per_episode)
        batches = draw_minibatches(st.d_beta, st.d_e, split, cfg.batch_size,
                                   replay_rng)
    else:
        if len(st.single) == 0:
            return
        batches = draw_minibatches(st.single, _EMPTY_FIFO,
                                   (cfg.updates_per_episode, 0),
                                   cfg.batch_size, replay_rng)
    for batch in batches:
        stacked = _stack_batch(batch)
        critic_update(st.agent, batch, cfg.bootstrap_discount, stacked=stacked)
        actor_update(st.agent, batch, stacked=stacked)
        st.agent.update_targets()


class _EmptyFifo:
    storage = ()

    def __len__(self):
        return 0


_EMPTY_FIFO = _EmptyFifo()


# -- checkpoints -----------------------------------------------------------


def save_checkpoint(agent, path):
    """Flat text dump of both nets (and targets) behind a versioned header."""
    with open(path, "w") as f:
        f.write(CHECKPOINT_MAGIC + "\n")
        f.write(f"state_dim {agent.state_dim}\n")
        f.write(f"goal_dim {agent.goal_dim}\n")
        f.write("hidden " + " ".join(str(h) for h in agent.actor.hidden) + "\n")
        f.write("action_low " + " ".join(repr(float(v)) for v in agent.action_box[0]) + "\n")
        f.write("action_high " + " ".join(repr(float(v)) for v in agent.action_box[1]) + "\n")
        f.write(f"gamma {repr(agent.gamma)}\n")
        f.write(f"tau {repr(agent.tau)}\n")
        for name, net in (("actor", agent.actor), ("critic", agent.critic),
                          ("target_actor", agent.target_actor),
                          ("target_critic", agent.target_critic)):
            for i, p in enumerate(net.parameters()):
                flat = p.ravel()
                f.write(f"array {name} {i} " + " ".join(str(d) for d in p.shape) + "\n")
                f.write(" ".join(repr(float(v)) for v in flat) + "\n")


def load_checkpoint(path):
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"not a recognizable checkpoint: {path}")
    meta = {}
    i = 1
    while i < len(lines) and not lines[i].startswith("array "):
        key, _, rest = lines[i].partition(" ")
        meta[key] = rest
        i += 1
    hidden = tuple(int(h) for h in meta["hidden"].split())
    low = np.array([float(v) for v in meta["action_low"].split()])
    high = np.array([float(v) for v in meta["action_high"].split()])
    agent = DdpgAgent(int(meta["state_dim"]), int(meta["goal_dim"]), (low, high),
                      hidden=hidden, gamma=float(meta["gamma"]),
                      tau=float(meta["tau"]), rng=np.random.default_rng(0))
    nets = {"actor": agent.actor, "critic": agent.critic,
            "target_actor": agent.target_actor, "target_critic": agent.target_critic}
    while i < len(lines):
        _, name, idx, *shape = lines[i].split()
        values = np.array([float(v) for v in lines[i + 1].split()])
        params = nets[name].parameters()
        params[int(idx)][...] = values.reshape([int(s) for s in shape])
        i += 2
    return agent
