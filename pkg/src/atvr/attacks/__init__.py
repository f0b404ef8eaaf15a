"""Adversarial attacks and exact worst-case oracles."""

from atvr.attacks.config import AttackConfig
from atvr.attacks.exact import exact_adv_loss_linear, exact_adv_margin_linear
from atvr.attacks.pgd import pgd_attack, pgd_attack_batch

__all__ = [
    "AttackConfig",
    "exact_adv_loss_linear",
    "exact_adv_margin_linear",
    "pgd_attack",
    "pgd_attack_batch",
]
