"""Exploration: option generation by tree search, plus baseline strategies.

The tree search grows a frontier from the current state, expanding children
either from the bucketed model buffer (approximate model) or from the true
transition function (perfect model). It returns the action path to the
first zero-count child, or after the budget is spent, to the least-visited
node found. verify_worst_case_bound() checks the closed-form lower bound
on how likely the search is to sample the hardest option.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class TreeNode:
    __slots__ = ("state", "action_from_parent", "parent", "code", "count", "depth")

    def __init__(self, state, action_from_parent, parent, code, count):
        self.state = state
        self.action_from_parent = action_from_parent
        self.parent = parent
        self.code = code
        self.count = count
        self.depth = 0 if parent is None else parent.depth + 1


def _path_actions(node):
    actions = []
    while node.parent is not None:
        actions.append(node.action_from_parent)
        node = node.parent
    actions.reverse()
    return actions


def generate_option_buffer(state, hasher, counts, model_buffer, budget, rng):
    """Search from `state` using the model buffer; None means no option.

    None is returned when the root's bucket is empty (nothing to expand
    from) or when no expanded node improved on the root's visit count; the
    caller falls back to a single uniform random action.
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    root_code = hasher.hash(state)
    if model_buffer.bucket_size(root_code) == 0:
        return None
    root = TreeNode(state, None, None, root_code, counts.count(root_code))
    frontier = [root]
    s_min = root
    for _ in range(budget):
        node = frontier[rng.integers(len(frontier))]
        trans = model_buffer.sample(node.code, rng)
        if trans is None:
            continue  # expanded a node whose bucket is empty; budget spent
        code = hasher.hash(trans.next_state)
        child = TreeNode(trans.next_state, trans.action, node, code, counts.count(code))
        frontier.append(child)
        if child.count == 0:
            return _path_actions(child)
        if child.count < s_min.count:  # ties keep the earlier node
            s_min = child
    if s_min is root:
        return None
    return _path_actions(s_min)


def generate_option_model(state, hasher, counts, transition_fn, action_box, budget, rng):
    """Search from `state` using the true transition function.

    Children come from uniformly sampled actions; always returns a nonempty
    option (a single random action when the search finds nothing better
    than the root).
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    root_code = hasher.hash(state)
    root = TreeNode(state, None, None, root_code, counts.count(root_code))
    frontier = [root]
    s_min = root
    for _ in range(budget):
        node = frontier[rng.integers(len(frontier))]
        action = random_action(action_box, rng)
        next_state = transition_fn(node.state, action)
        code = hasher.hash(next_state)
        child = TreeNode(next_state, action, node, code, counts.count(code))
        frontier.append(child)
        if child.count == 0:
            return _path_actions(child)
        if child.count < s_min.count:
            s_min = child
    if s_min is root:
        return [random_action(action_box, rng)]
    return _path_actions(s_min)


def random_action(action_box, rng):
    low, high = action_box
    return rng.uniform(low, high)


def ez_greedy_option(budget, action_box, rng):
    """One random action repeated for a Uniform{1..budget} duration."""
    if budget < 1:
        raise ValueError("budget must be positive")
    n = int(rng.integers(1, budget + 1))
    action = random_action(action_box, rng)
    return [action.copy() for _ in range(n)]


@dataclass
class EpsilonSchedule:
    epsilon: float = 1.0
    decay_rate: float = 0.9999988
    floor: float = 0.0

    def decay(self):
        self.epsilon = max(self.epsilon * self.decay_rate, self.floor)


@dataclass
class ActionSelector:
    """Behavior policy: greedy actor, or an exploratory option branch.

    strategy is one of "etgreedy", "ezgreedy", "egreedy". While an option
    is running its actions are replayed open-loop without re-checking
    epsilon; reset() aborts it at episode boundaries.
    """

    strategy: str
    schedule: EpsilonSchedule
    budget: int
    action_box: tuple
    _pending: list = field(default_factory=list)

    def reset(self):
        self._pending.clear()

    def option_in_progress(self):
        return len(self._pending) > 0

    def select(self, state, goal, greedy_fn, rng, generate_option=None):
        if self._pending:
            return self._pending.pop(0)
        if rng.random() < self.schedule.epsilon:
            if self.strategy == "egreedy":
                return random_action(self.action_box, rng)
            if self.strategy == "ezgreedy":
                option = ez_greedy_option(self.budget, self.action_box, rng)
            elif self.strategy == "etgreedy":
                option = generate_option(state)
                if option is None:
                    return random_action(self.action_box, rng)
            else:
                raise ValueError(f"unknown strategy {self.strategy!r}")
            self._pending = list(option)
            return self._pending.pop(0)
        low, high = self.action_box
        return np.clip(greedy_fn(state, goal), low, high)


# -- worst-case sampling bound --------------------------------------------


def chain_option_probability(bucket_sizes):
    """Closed-form probability of sampling the hardest chain option.

    With bucket sizes m_1..m_N along the worst-case chain, reaching the
    chain's end costs 1/((i-1) * m_{i-1}) at step i, giving
    1 / ((N-1)! * m_1 * ... * m_{N-1}).
    """
    n = len(bucket_sizes)
    if n < 2 or any(m < 1 for m in bucket_sizes):
        raise ValueError("need at least two positive bucket sizes")
    denom = math.factorial(n - 1)
    for m in bucket_sizes[:-1]:
        denom *= m
    return Fraction(1, denom)


def sampling_lower_bound(bucket_sizes):
    """1 / (N! * max_size^(N-1))."""
    n = len(bucket_sizes)
    return Fraction(1, math.factorial(n) * max(bucket_sizes) ** (n - 1))


def enumerate_option_distribution(buckets, counts, root_state, budget):
    """Exhaustively run the tree search over all random choices.

    buckets maps state -> list of (action, next_state); counts maps
    state -> visit count. Returns a dict mapping each possible returned
    option (tuple of actions, or None for the no-option fallback) to its
    exact probability as a Fraction.
    """
    results = {}

    def record(option, prob):
        results[option] = results.get(option, Fraction(0)) + prob

    def walk(frontier, s_min_idx, prob, steps_left):
        # frontier entries: (state, action_path)
        if steps_left == 0:
            state, path = frontier[s_min_idx]
            record(tuple(path) if path else None, prob)
            return
        k = len(frontier)
        for state, path in list(frontier):
            bucket = buckets.get(state, [])
            if not bucket:
                walk(frontier, s_min_idx, prob / k, steps_left - 1)
                continue
            for action, nxt in bucket:
                p = prob / (k * len(bucket))
                child = (nxt, path + [action])
                if counts.get(nxt, 0) == 0:
                    record(tuple(child[1]), p)
                    continue
                new_min = s_min_idx
                if counts.get(nxt, 0) < counts.get(frontier[s_min_idx][0], 0):
                    new_min = len(frontier)
                walk(frontier + [child], new_min, p, steps_left - 1)

    if not buckets.get(root_state):
        return {None: Fraction(1)}
    walk([(root_state, [])], 0, Fraction(1), budget)
    # an execution ending with s_min == root yields no option
    return results


def worst_case_chain_mdp(bucket_sizes):
    """Build the hardest-chain toy model for the enumeration oracle.

    States c1..cN form the chain with strictly decreasing counts; every
    other transition in a bucket leads to a heavily visited filler state.
    Returns (buckets, counts, root, hardest_option).
    """
    n = len(bucket_sizes)
    buckets = {}
    counts = {}
    filler_count = n + 10
    for i, m in enumerate(bucket_sizes):
        state = f"c{i + 1}"
        counts[state] = n + 1 - i  # decreasing along the chain, always >= 1
        entries = []
        if i + 1 < n:
            entries.append((f"a{i + 1}", f"c{i + 2}"))
        for j in range(m - len(entries)):
            filler = f"f{i + 1}_{j}"
            counts[filler] = filler_count
            entries.append((f"x{i + 1}_{j}", filler))
        buckets[state] = entries
    hardest = tuple(f"a{i + 1}" for i in range(n - 1))
    return buckets, counts, "c1", hardest


def verify_worst_case_bound(budget, bucket_sizes, state_action_size=None,
                            enumerate_chain=True):
    """Check the sampling-probability inequality chain; returns a report.

    The closed-form chain probability must dominate the factorial bound;
    when state_action_size is given and the budget satisfies the
    sub-logarithmic condition, the bound must in turn dominate
    1/state_action_size. With enumerate_chain, the bound is also checked
    against an exhaustive enumeration of the search on the hardest chain.
    """
    if len(bucket_sizes) != budget:
        raise ValueError("need one bucket size per tree node")
    if any(m < 1 for m in bucket_sizes):
        raise ValueError("bucket sizes must be positive")
    p = chain_option_probability(bucket_sizes)
    bound = sampling_lower_bound(bucket_sizes)
    report = {
        "budget": budget,
        "bucket_sizes": list(bucket_sizes),
        "chain_probability": p,
        "lower_bound": bound,
        "chain_dominates_bound": p >= bound,
    }
    if state_action_size is not None:
        cond = budget <= math.log(state_action_size) / math.log(math.log(state_action_size))
        report["budget_condition_holds"] = cond
        report["bound_dominates_inverse_sa"] = bound >= Fraction(1, state_action_size)
        report["implication_holds"] = (not cond) or bound >= Fraction(1, state_action_size)
    if enumerate_chain:
        buckets, counts, root, hardest = worst_case_chain_mdp(bucket_sizes)
        dist = enumerate_option_distribution(buckets, counts, root, budget)
        options = {o: q for o, q in dist.items() if o is not None}
        report["hardest_option_probability"] = options.get(hardest, Fraction(0))
        report["min_option_probability"] = min(options.values())
        report["enumeration_dominates_chain_probability"] = (
            report["min_option_probability"] >= p)
    return report


def format_report(report):
    lines = [f"budget N = {report['budget']}, bucket sizes = {report['bucket_sizes']}"]
    p, b = report["chain_probability"], report["lower_bound"]
    lines.append(f"hardest-chain probability P = {p} ({float(p):.6g})")
    lines.append(f"factorial lower bound       = {b} ({float(b):.6g})")
    lines.append(f"P >= bound: {report['chain_dominates_bound']}")
    if "budget_condition_holds" in report:
        lines.append(f"budget condition holds: {report['budget_condition_holds']}")
        lines.append(f"bound >= 1/(|S||A|): {report['bound_dominates_inverse_sa']}"
                     f" (implication holds: {report['implication_holds']})")
    if "min_option_probability" in report:
        m = report["min_option_probability"]
        lines.append(f"exhaustive enumeration: min option probability = {m}"
                     f" ({float(m):.6g}), hardest option = "
                     f"{report['hardest_option_probability']}")
        lines.append("enumeration >= P: "
                     f"{report['enumeration_dominates_chain_probability']}")
    return "\n".join(lines)
