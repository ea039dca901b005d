"""Independent numpy oracles used to freeze golden values for the C++ tests.

Nothing here shares code with the C++ implementation: trajectory enumeration
is a plain itertools.product loop and the infinite-horizon quantities use
numpy.linalg.solve.
"""
import itertools
import json
import math

import numpy as np


def load(path):
    with open(path) as f:
        return json.load(f)


def softmax_table(theta, n_s, n_a):
    t = np.asarray(theta, dtype=float).reshape(n_s, n_a)
    e = np.exp(t - t.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def score(pi, n_s, n_a, s, a):
    g = np.zeros(n_s * n_a)
    for b in range(n_a):
        g[s * n_a + b] = (1.0 if b == a else 0.0) - pi[s, b]
    return g


def brute_force(mdp, theta, H):
    n_s, n_a = mdp["n_states"], mdp["n_actions"]
    P = np.asarray(mdp["transition"], dtype=float)
    r = np.asarray(mdp["reward"], dtype=float)
    rho = np.asarray(mdp["rho"], dtype=float)
    gamma = mdp["gamma"]
    pi = softmax_table(theta, n_s, n_a)
    grad = np.zeros(n_s * n_a)
    J = 0.0
    for traj in itertools.product(range(n_s * n_a), repeat=H):
        states = [x // n_a for x in traj]
        actions = [x % n_a for x in traj]
        p = rho[states[0]]
        for t in range(H):
            p *= pi[states[t], actions[t]]
            if t + 1 < H:
                p *= P[states[t], actions[t], states[t + 1]]
        if p == 0.0:
            continue
        rewards = [r[states[t], actions[t]] for t in range(H)]
        ret = sum(gamma ** t * rewards[t] for t in range(H))
        g = np.zeros(n_s * n_a)
        for t in range(H):
            coeff = sum(gamma ** h * rewards[h] for h in range(t, H))
            g += coeff * score(pi, n_s, n_a, states[t], actions[t])
        grad += p * g
        J += p * ret
    return J, grad


def infinite(mdp, theta):
    n_s, n_a = mdp["n_states"], mdp["n_actions"]
    P = np.asarray(mdp["transition"], dtype=float)
    r = np.asarray(mdp["reward"], dtype=float)
    rho = np.asarray(mdp["rho"], dtype=float)
    gamma = mdp["gamma"]
    pi = softmax_table(theta, n_s, n_a)
    P_pi = np.einsum("sa,sat->st", pi, P)
    r_pi = (pi * r).sum(axis=1)
    v = np.linalg.solve(np.eye(n_s) - gamma * P_pi, r_pi)
    d = np.linalg.solve(np.eye(n_s) - gamma * P_pi.T, rho)
    Q = r + gamma * np.einsum("sat,t->sa", P, v)
    grad = np.zeros(n_s * n_a)
    for s in range(n_s):
        for a in range(n_a):
            grad += d[s] * pi[s, a] * Q[s, a] * score(pi, n_s, n_a, s, a)
    # optimal value by enumerating deterministic policies
    best = -math.inf
    for choice in itertools.product(range(n_a), repeat=n_s):
        Pd = np.array([P[s, choice[s]] for s in range(n_s)])
        rd = np.array([r[s, choice[s]] for s in range(n_s)])
        vd = np.linalg.solve(np.eye(n_s) - gamma * Pd, rd)
        best = max(best, float(rho @ vd))
    return float(rho @ v), grad, best
