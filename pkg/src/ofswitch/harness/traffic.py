"""Workload generation: flow sizes, arrival times, and size classes.

Flow sizes follow a bounded Pareto distribution, which produces the
heavy-tailed mix seen in data-center traces: most flows are tiny, a few
carry most of the bytes.  Flows are bucketed by size for reporting:
under 10 KB is a "mouse", over 10 MB is an "elephant", anything between
is a "rabbit".
"""

from __future__ import annotations

import random
from dataclasses import dataclass

MOUSE_MAX_BYTES = 10_000
ELEPHANT_MIN_BYTES = 10_000_000

CLASS_NAMES = ("mouse", "rabbit", "elephant")


def classify(size_bytes: int) -> str:
    if size_bytes < MOUSE_MAX_BYTES:
        return "mouse"
    if size_bytes > ELEPHANT_MIN_BYTES:
        return "elephant"
    return "rabbit"


def bounded_pareto(rng: random.Random, alpha: float, lo: float, hi: float) -> float:
    """Inverse-CDF sample of a Pareto truncated to [lo, hi]."""
    u = rng.random()
    la, ha = lo ** alpha, hi ** alpha
    return (-(u * ha - u * la - ha) / (ha * la)) ** (-1.0 / alpha)


@dataclass
class FlowSpec:
    start: float
    src: int          # host indices within the fabric
    dst: int
    size_bytes: int

    @property
    def kind(self) -> str:
        return classify(self.size_bytes)


@dataclass
class TrafficProfile:
    seed: int = 1
    load: float = 0.1              # offered fraction of each access link
    alpha: float = 1.2
    min_bytes: int = 600
    max_bytes: int = 20_000_000
    duration: float = 1.0          # arrival window in simulated seconds
    stratify: bool = True          # force at least one flow per size class

    def mean_flow_bytes(self, samples: int = 2000) -> float:
        rng = random.Random(self.seed ^ 0x5EED)
        total = sum(bounded_pareto(rng, self.alpha, self.min_bytes, self.max_bytes)
                    for _ in range(samples))
        return total / samples

    def generate(self, n_hosts: int, access_bps: float) -> list[FlowSpec]:
        if n_hosts < 2:
            raise ValueError("need at least two hosts to generate traffic")
        rng = random.Random(self.seed)
        mean = self.mean_flow_bytes()
        # arrivals per second across the fabric that offer `load` of each
        # access link on average
        rate = self.load * access_bps * n_hosts / (8.0 * mean)
        flows = []
        t = 0.0
        while True:
            t += rng.expovariate(rate)
            if t >= self.duration:
                break
            size = int(bounded_pareto(rng, self.alpha, self.min_bytes, self.max_bytes))
            src = rng.randrange(n_hosts)
            dst = rng.randrange(n_hosts - 1)
            if dst >= src:
                dst += 1
            flows.append(FlowSpec(t, src, dst, size))
        if self.stratify:
            self._ensure_classes(flows, rng, n_hosts)
        flows.sort(key=lambda f: (f.start, f.src, f.dst, f.size_bytes))
        return flows

    def _ensure_classes(self, flows: list[FlowSpec], rng: random.Random,
                        n_hosts: int) -> None:
        present = {f.kind for f in flows}
        forced_sizes = {
            "mouse": MOUSE_MAX_BYTES // 2,
            "rabbit": (MOUSE_MAX_BYTES + ELEPHANT_MIN_BYTES) // 2,
            "elephant": min(self.max_bytes, 2 * ELEPHANT_MIN_BYTES),
        }
        for kind in CLASS_NAMES:
            if kind in present:
                continue
            src = rng.randrange(n_hosts)
            dst = (src + 1) % n_hosts
            flows.append(FlowSpec(rng.uniform(0, self.duration / 2), src, dst,
                                  forced_sizes[kind]))
