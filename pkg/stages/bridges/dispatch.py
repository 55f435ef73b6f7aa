"""
Uniform entry point over the six bridge samplers.
"""
from core.generator import Generator
from stages.bridges.bisection import sample_bisection
from stages.bridges.direct import sample_direct
from stages.bridges.modified_rejection import sample_modified_rejection
from stages.bridges.problem import BridgeProblem, BridgeSample
from stages.bridges.rejection import sample_rejection
from stages.bridges.time_reverse import sample_time_reverse
from stages.bridges.uniformization import sample_uniformization


SAMPLERS = {
    "rej": sample_rejection,
    "mor": sample_modified_rejection,
    "dir": sample_direct,
    "uni": sample_uniformization,
    "bis": sample_bisection,
    "tir": sample_time_reverse,
}


def sample_bridge(g: Generator, prob: BridgeProblem, rng, **options) -> BridgeSample:
    """
    Sample one bridge with the method named on the problem.
    options are passed through to that sampler (see config.sampler_options).
    """
    return SAMPLERS[prob.method](g, prob, rng, **options)


def sample_bridges(g: Generator, prob: BridgeProblem, rng, count: int, **options):
    return [sample_bridge(g, prob, rng, **options) for _ in range(count)]
