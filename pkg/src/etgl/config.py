"""Run configuration, validation, and seeded random substreams.

Desk-scale runs default to 2e5 frames; schedules tuned at reference scale
(2e6 frames) shrink proportionally: the warmup gets shorter and the epsilon
decay gets correspondingly faster.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np

ALGOS = ("ddpg", "et", "gdrb", "lnstep", "etgl")
EXPLORES = ("etgreedy", "ezgreedy", "egreedy")
MODEL_SOURCES = ("buffer", "perfect")
ENVS = ("wallmaze", "umaze")

REFERENCE_FRAMES = 2_000_000
REFERENCE_WARMUP = 200_000
REFERENCE_EPSILON_DECAY = 0.9999988

DEFAULT_BUDGETS = {"wallmaze": 20, "umaze": 40}


@dataclass
class RunConfig:
    env: str = "wallmaze"
    algo: str = "etgl"
    explore: str = ""            # derived from algo when left empty
    model_source: str = "buffer"
    seed: int = 0
    total_frames: int = 200_000
    checkpoint_interval: int = 5_000
    budget: int = 0              # 0 -> per-env default
    epsilon_decay: float = 0.0   # 0 -> scaled reference rate
    epsilon_floor: float = 0.0
    warmup: int = -1             # -1 -> scaled reference warmup
    batch_size: int = 128
    updates_per_episode: int = 20
    gamma: float = 0.99
    tau: float = 0.01
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    hidden: tuple = (128, 128, 128)
    hash_k: int = 9
    bucket_capacity: int = 32
    exploration_buffer_size: int = 1_000_000
    exploitation_buffer_size: int = 50_000
    single_buffer_size: int = 1_000_000
    bootstrap_discount: str = "horizon"  # or "single": literal one-gamma bootstrap
    search_updates_counts: bool = False  # hypothetical child states bump n(phi)
    eval_episodes: int = 20
    coverage_cell: float = 0.5
    coverage_threshold: int = 3
    out_dir: str = "runs"

    @property
    def scale_factor(self):
        return self.total_frames / REFERENCE_FRAMES

    def resolved(self):
        """Fill derived fields and validate; returns a new config."""
        cfg = replace(self)
        if cfg.env not in ENVS:
            raise ValueError(f"--env must be one of {ENVS}, got {cfg.env!r}")
        if cfg.algo not in ALGOS:
            raise ValueError(f"--algo must be one of {ALGOS}, got {cfg.algo!r}")
        if cfg.model_source not in MODEL_SOURCES:
            raise ValueError(f"--model-source must be one of {MODEL_SOURCES}")
        if not cfg.explore:
            cfg.explore = "etgreedy" if cfg.algo in ("et", "etgl") else "egreedy"
        if cfg.explore not in EXPLORES:
            raise ValueError(f"--explore must be one of {EXPLORES}, got {cfg.explore!r}")
        if cfg.algo in ("et", "etgl") and cfg.explore != "etgreedy":
            raise ValueError(f"--algo {cfg.algo} requires --explore etgreedy")
        if cfg.budget == 0:
            cfg.budget = DEFAULT_BUDGETS[cfg.env]
        if cfg.total_frames < 0 or cfg.checkpoint_interval < 1:
            raise ValueError("--frames must be >= 0 and checkpoint interval positive")
        if cfg.budget < 1:
            raise ValueError("--budget must be positive")
        if cfg.warmup < 0:
            cfg.warmup = int(round(REFERENCE_WARMUP * cfg.scale_factor))
        if cfg.epsilon_decay == 0.0:
            if cfg.scale_factor > 0:
                cfg.epsilon_decay = REFERENCE_EPSILON_DECAY ** (1.0 / cfg.scale_factor)
            else:
                cfg.epsilon_decay = REFERENCE_EPSILON_DECAY
        if not 0.0 < cfg.epsilon_decay <= 1.0:
            raise ValueError("--epsilon-decay must lie in (0, 1]")
        for name, lo in (("batch_size", 1), ("updates_per_episode", 1),
                         ("hash_k", 1), ("bucket_capacity", 1), ("eval_episodes", 1)):
            if getattr(cfg, name) < lo:
                raise ValueError(f"{name} must be >= {lo}")
        if not 0.0 <= cfg.gamma <= 1.0 or not 0.0 <= cfg.tau <= 1.0:
            raise ValueError("gamma and tau must lie in [0, 1]")
        if cfg.bootstrap_discount not in ("horizon", "single"):
            raise ValueError("bootstrap_discount must be 'horizon' or 'single'")
        return cfg

    def uses_gdrb(self):
        return self.algo in ("gdrb", "etgl")

    def uses_longest_nstep(self):
        return self.algo in ("lnstep", "etgl")

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = " ".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def apply_overrides(cfg, overrides):
    """Apply key=value pairs (from a config file or CLI) onto cfg."""
    valid = {f.name: f for f in fields(RunConfig)}
    out = replace(cfg)
    for key, raw in overrides.items():
        if key not in valid:
            raise ValueError(f"unknown config key {key!r}")
        current = getattr(RunConfig(), key)
        if isinstance(current, bool):
            value = raw in ("1", "true", "True", "yes")
        elif isinstance(current, int):
            value = int(raw)
        elif isinstance(current, float):
            value = float(raw)
        elif isinstance(current, tuple):
            value = tuple(int(x) for x in str(raw).split())
        else:
            value = raw
        out = replace(out, **{key: value})
    return out


def read_config_file(path):
    """key = value lines; '#' starts a comment."""
    overrides = {}
    with open(path) as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            overrides[key.strip()] = value.strip()
    return overrides


# named substreams so every component draws from its own seeded generator
_STREAMS = {"env": 0, "explorer": 1, "nets": 2, "replay": 3, "eval": 4}


def substream(seed, name, extra=None):
    key = [int(seed), _STREAMS[name]]
    if extra is not None:
        key.append(int(extra))
    return np.random.default_rng(np.random.SeedSequence(key))
