"""Exception types shared across the library."""

from __future__ import annotations


class NumericFailure(RuntimeError):
    """A numerical routine failed to converge or lost too much accuracy.

    Carries enough context to replay the failing input: the seed pair
    (root_seed, stream_id) when the input came from a sampler, plus a
    free-form description.
    """

    def __init__(self, message: str, *, root_seed: int | None = None,
                 stream_id: int | None = None):
        if root_seed is not None:
            message = f"{message} [replay: root_seed={root_seed} stream_id={stream_id}]"
        super().__init__(message)
        self.root_seed = root_seed
        self.stream_id = stream_id


class SampleDiscarded(Exception):
    """A sampled instance was non-generic and should be resampled.

    Raised by pencil analysis when a scan cannot resolve its crossings;
    the experiment driver catches it, counts the discard and redraws.
    """


class UnsupportedConfiguration(ValueError):
    """The requested geometric configuration has no closed-form support."""
