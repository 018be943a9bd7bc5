"""Optimizers operating in place on parameter/gradient list pairs."""

from __future__ import annotations

import numpy as np


class SGD:
    """Momentum SGD with optional weight decay and a step-down schedule.

    schedule entries are (epoch, multiplier); every entry whose epoch has
    been reached multiplies the base learning rate.
    """

    def __init__(self, lr, momentum=0.0, weight_decay=0.0, schedule=()):
        if lr <= 0:
            raise ValueError("lr must be > 0")
        if not 0.0 <= momentum < 1.0:
            raise ValueError("momentum must be in [0,1)")
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.schedule = tuple(schedule)
        self._velocity = None

    def lr_at(self, epoch: int) -> float:
        lr = self.lr
        for at_epoch, mult in self.schedule:
            if epoch >= at_epoch:
                lr *= mult
        return lr

    def step(self, params, grads, epoch: int = 0):
        if self._velocity is None:
            self._velocity = [np.zeros_like(p) for p in params]
        lr = self.lr_at(epoch)
        for p, g, v in zip(params, grads, self._velocity):
            v *= self.momentum
            v += g
            if self.weight_decay:
                v += self.weight_decay * p
            p -= lr * v


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise ValueError("lr must be > 0")
        if not 0.0 <= beta1 < 1.0:
            raise ValueError("beta1 must be in [0,1)")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m = None
        self._v = None
        self._t = 0

    def step(self, params, grads, epoch: int = 0):
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self._t += 1
        b1c = 1.0 - self.beta1**self._t
        b2c = 1.0 - self.beta2**self._t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
