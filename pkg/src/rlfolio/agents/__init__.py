"""The three actor-critic learners behind a single train/act interface."""
from __future__ import annotations

from .a2c import A2CAgent
from .common import (Agent, AgentConfig, ReplayBuffer, Transition, advantage,
                     stack_rollout)
from .ddpg import DDPGAgent
from .ppo import PPOAgent, ppo_clip_objective

AGENT_KINDS = ("PPO", "A2C", "DDPG")

_CLASSES = {"A2C": A2CAgent, "PPO": PPOAgent, "DDPG": DDPGAgent}


def make_agent(kind: str, obs_dim: int, action_dim: int,
               config: AgentConfig = AgentConfig(), seed: int = 0) -> Agent:
    try:
        cls = _CLASSES[kind.upper()]
    except KeyError:
        raise ValueError(f"unknown agent kind {kind!r}") from None
    return cls(obs_dim, action_dim, config, seed)


def train_agent(kind: str, env, config: AgentConfig, seed: int,
                warm_start: Agent | None = None) -> Agent:
    """Train one agent on an environment window, deterministically per seed.

    `warm_start` copies parameters from a previously trained agent of the
    same kind (walk-forward continuation); optimizer state starts fresh.
    """
    agent = make_agent(kind, env.obs_dim, env.action_dim, config, seed)
    if warm_start is not None:
        if warm_start.kind != agent.kind:
            raise ValueError("warm start kind mismatch")
        for dst, src in zip(agent.parameters(), warm_start.parameters()):
            dst[...] = src
        if isinstance(agent, DDPGAgent):
            for dst, src in zip(agent.target_actor.params,
                                warm_start.target_actor.params):
                dst[...] = src
            for dst, src in zip(agent.target_critic.params,
                                warm_start.target_critic.params):
                dst[...] = src
    if config.total_steps > 0:
        agent.train(env, config.total_steps)
    return agent


__all__ = [
    "Agent", "AgentConfig", "A2CAgent", "DDPGAgent", "PPOAgent",
    "ReplayBuffer", "Transition", "AGENT_KINDS", "advantage",
    "make_agent", "ppo_clip_objective", "stack_rollout", "train_agent",
]
