"""Poke at the conditional cooperator's learning rule in isolation.

The agent keeps an expected cooperative contribution p.  A payoff above the
aspiration level (1.0) reinforces whatever it just did; a payoff below
suppresses it.  Whether "reinforce" means raising or lowering p depends on
whether the last action counted as cooperative (>= X = 0.4).
"""

import numpy as np

from pggnudge.cc import CcParams, bm_update, stimulus

params = CcParams()

print("stimulus as a function of payoff (aspiration 1.0, beta 0.4):")
for payoff in (0.0, 0.5, 1.0, 1.3, 1.6, 2.2):
    print(f"  payoff {payoff:.1f} -> stimulus {stimulus(payoff, params):+.4f}")

print("\none update from p=0.5 under the four cases:")
for last_action, payoff, label in [
    (0.8, 1.6, "cooperated, satisfied   "),
    (0.8, 0.6, "cooperated, dissatisfied"),
    (0.1, 1.4, "defected,   satisfied   "),
    (0.1, 0.6, "defected,   dissatisfied"),
]:
    s = stimulus(payoff, params)
    p_next = bm_update(0.5, last_action, s, params)
    print(f"  {label}: s={s:+.3f}  p 0.500 -> {p_next:.3f}")

print("\np trajectory of a lone high-contributor stuck in a low group")
print("(it contributes 0.9 into a pool where the other three give 0.1):")
p = 0.9
for t in range(10):
    group = 0.9 + 3 * 0.1
    payoff = (1.6 / 4) * group + (1 - 0.9)
    s = stimulus(payoff, params)
    p = bm_update(p, 0.9, s, params)
    print(f"  round {t + 2}: payoff {payoff:.3f}, stimulus {s:+.3f}, p -> {p:.3f}")
print("a cooperator surrounded by defectors is dissatisfied and gives up.")
