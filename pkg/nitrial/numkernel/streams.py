#!/usr/bin/env python3
# Copyright OpenSearch Contributors
# SPDX-License-Identifier: Apache-2.0

"""
Reproducible random number streams.

A stream is identified by (master seed, index, sub-stream path) and maps to a
numpy SeedSequence whose spawn key carries the index and path, so distinct
identifiers yield independent PCG64 generators.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from nitrial.errors import ImproperInput

UINT64 = 2 ** 64


@dataclass(frozen=True)
class SeedStream:
    master: int
    index: int
    path: Tuple[int, ...] = ()

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.master, spawn_key=(self.index, *self.path))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def spawn(self, k: int) -> 'SeedStream':
        """Sub-stream k of this stream."""
        return SeedStream(self.master, self.index, self.path + (int(k),))

    def state64(self) -> int:
        """First 64 bits of the derived state, used as a plain integer seed."""
        return int(self.seed_sequence().generate_state(1, np.uint64)[0])


def derive_stream(master: int, index: int) -> SeedStream:
    """Deterministically derive stream ``index`` from ``master``."""
    if not 0 <= int(master) < UINT64:
        raise ImproperInput(f"master seed {master} is not a 64-bit unsigned integer")
    if int(index) < 0:
        raise ImproperInput(f"stream index {index} must be non-negative")
    return SeedStream(int(master), int(index))
