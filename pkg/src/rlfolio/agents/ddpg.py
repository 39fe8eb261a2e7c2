"""Deep deterministic policy gradient with replay and target networks."""
from __future__ import annotations

import numpy as np

from ..errors import GradInvalid
from ..neural import Adam, Mlp
from .common import Agent, AgentConfig, ReplayBuffer, Transition


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    for pt, po in zip(target.params, online.params):
        pt *= 1.0 - tau
        pt += tau * po


class DDPGAgent(Agent):
    kind = "DDPG"

    def __init__(self, obs_dim: int, action_dim: int,
                 config: AgentConfig = AgentConfig(), seed: int = 0):
        super().__init__(obs_dim, action_dim, config, seed)
        init_rng = np.random.default_rng(np.random.SeedSequence([seed, 3]))
        # actor output passes through tanh to stay inside [-1, 1]
        self.actor = Mlp([obs_dim, *config.hidden, action_dim], init_rng)
        self.critic = Mlp([obs_dim + action_dim, *config.hidden, 1], init_rng)
        self.target_actor = self.actor.clone()
        self.target_critic = self.critic.clone()
        self.actor_opt = Adam(lr=config.actor_lr)
        self.critic_opt = Adam(lr=config.critic_lr)
        self.buffer = ReplayBuffer(config.buffer_capacity)

    def parameters(self) -> list[np.ndarray]:
        return self.actor.params + self.critic.params

    def mu(self, obs) -> np.ndarray:
        return np.tanh(self.actor.forward(obs))

    def act(self, obs, mode: str = "deterministic") -> np.ndarray:
        obs = self._check_obs(obs)
        action = self.mu(obs)
        if mode == "stochastic":
            action = action + self.config.noise_scale * \
                self.rng.standard_normal(self.action_dim)
        return np.clip(action, -1.0, 1.0)

    def targets(self, rewards, next_obs, dones) -> np.ndarray:
        """TD targets y = r + gamma * Q'(s', mu'(s')) with terminal masking."""
        a_next = np.tanh(self.target_actor.forward(next_obs))
        q_next = self.target_critic.forward(
            np.concatenate([next_obs, a_next], axis=1))[:, 0]
        return rewards + self.config.gamma * q_next * (1.0 - dones)

    def update(self, batch: list[Transition] | None = None,
               batch_n: int | None = None) -> dict:
        cfg = self.config
        if batch is None:
            batch = self.buffer.sample(batch_n or cfg.batch_size, self.rng)
        obs = np.stack([tr.state_vec for tr in batch])
        actions = np.stack([tr.action for tr in batch])
        rewards = np.array([tr.reward for tr in batch])
        next_obs = np.stack([tr.next_state_vec for tr in batch])
        dones = np.array([tr.done for tr in batch], dtype=float)
        n = len(batch)

        y = self.targets(rewards, next_obs, dones)
        q, cache = self.critic.forward_cache(np.concatenate([obs, actions], axis=1))
        critic_loss = float(((q[:, 0] - y) ** 2).mean())
        if not np.isfinite(critic_loss):
            raise GradInvalid("non-finite critic loss; update skipped")
        critic_grads, _ = self.critic.backward(cache, (2.0 / n) * (q - y[:, None]))
        self.critic_opt.step(self.critic.params, critic_grads)

        # actor ascends Q(s, mu(s)): critic input-gradient w.r.t. the action
        # slice, chained through tanh, then through the actor net
        raw, actor_cache = self.actor.forward_cache(obs)
        a_pi = np.tanh(raw)
        _, q_cache = self.critic.forward_cache(np.concatenate([obs, a_pi], axis=1))
        _, dinput = self.critic.backward(q_cache, np.full((n, 1), 1.0 / n))
        da = dinput[:, self.obs_dim:] * (1.0 - a_pi ** 2)
        actor_grads, _ = self.actor.backward(actor_cache, da)
        self.actor_opt.step(self.actor.params, [-g for g in actor_grads])

        soft_update(self.target_actor, self.actor, cfg.tau)
        soft_update(self.target_critic, self.critic, cfg.tau)
        diag = {"critic_loss": critic_loss, "mean_q": float(q.mean())}
        self.log(**diag)
        return diag

    def train(self, env, total_steps: int | None = None) -> None:
        cfg = self.config
        total = cfg.total_steps if total_steps is None else total_steps
        steps = 0
        obs = env.reset()
        episode_return = 0.0
        while steps < total:
            action = self.act(obs, mode="stochastic")
            next_obs, reward, done = env.step(action)
            self.buffer.push(Transition(obs, action, reward, next_obs, done))
            episode_return += reward
            steps += 1
            obs = next_obs
            if done:
                self.log(episode_return=episode_return, step=steps)
                episode_return = 0.0
                obs = env.reset()
            if len(self.buffer) >= max(cfg.warmup_steps, cfg.batch_size):
                self.update()
