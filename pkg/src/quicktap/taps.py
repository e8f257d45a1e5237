"""Touch streams, tap segmentation, ground-truth labeling, and the
conventional fixed-threshold tap detector.

Timestamps are integer microseconds throughout so latency arithmetic is
exact. Coordinates are normalized to [0, 1] with the origin at the
upper-left corner of the surface.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import MalformedStreamError

#: Inter-tap window separating a double tap from two singles (500 ms, the
#: value popular desktop OSs ship with).
DOUBLE_TAP_THRESHOLD_US = 500_000

#: Contacts longer than this are discarded as non-taps during segmentation.
DEFAULT_MAX_TAP_US = 500_000

#: Contacts that wander farther than this (normalized units, per axis) from
#: their touch-down point are discarded as drags.
DEFAULT_MAX_TRAVEL = 0.05


class Phase(enum.Enum):
    DOWN = "down"
    MOVE = "move"
    UP = "up"


class PowerSource(enum.Enum):
    AC = "ac"
    BATTERY = "battery"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TouchSample:
    """One sensor frame of a single-finger contact."""

    t_us: int
    x: float
    y: float
    contact_size: float
    phase: Phase
    power: PowerSource = PowerSource.UNKNOWN

    def __post_init__(self):
        if self.t_us < 0:
            raise ValueError(f"timestamp must be non-negative, got {self.t_us}")
        if not (0.0 <= self.x <= 1.0) or not (0.0 <= self.y <= 1.0):
            raise ValueError(f"coordinates must lie in [0,1], got ({self.x}, {self.y})")
        if self.contact_size < 0:
            raise ValueError(f"contact size must be non-negative, got {self.contact_size}")


@dataclass(frozen=True)
class TapRecord:
    """A segmented tap: the full Down..Up sample run plus derived extrema."""

    id: int
    down: TouchSample
    up: TouchSample
    samples: tuple[TouchSample, ...]
    max_contact_size: float
    completion_us: int

    @classmethod
    def from_samples(cls, tap_id: int, samples: tuple[TouchSample, ...]) -> "TapRecord":
        down, up = samples[0], samples[-1]
        return cls(
            id=tap_id,
            down=down,
            up=up,
            samples=samples,
            max_contact_size=max(s.contact_size for s in samples),
            completion_us=up.t_us - down.t_us,
        )


class TapLabel(enum.Enum):
    SINGLE = "single"
    DOUBLE_FIRST = "double_first"


class TapRole(enum.Enum):
    #: A scoring/training unit: an isolated single tap or the first tap of
    #: a double.
    PRIMARY = "primary"
    #: Trailing tap of a double; excluded from training and evaluation.
    DOUBLE_SECOND = "double_second"


@dataclass(frozen=True)
class LabeledTap:
    """A tap with its ground-truth label and pairing role.

    DOUBLE_SECOND taps carry label SINGLE vacuously; they are never scored.
    """

    tap: TapRecord
    label: TapLabel
    role: TapRole

    def __post_init__(self):
        if self.role is TapRole.DOUBLE_SECOND and self.label is TapLabel.DOUBLE_FIRST:
            raise ValueError("a trailing double tap cannot itself be labeled double-first")


class TapEventKind(enum.Enum):
    SINGLE_TAP_FIRED = "single_tap_fired"
    DOUBLE_TAP_FIRED = "double_tap_fired"


@dataclass(frozen=True)
class DetectorEvent:
    kind: TapEventKind
    emit_t_us: int
    source_tap_id: int


def segment_taps(
    stream: list[TouchSample],
    max_tap_us: int = DEFAULT_MAX_TAP_US,
    max_travel: float = DEFAULT_MAX_TRAVEL,
) -> list[TapRecord]:
    """Split a raw sample stream into discrete taps.

    A tap is one Down..Up run whose duration is at most ``max_tap_us`` and
    whose per-axis deviation from the touch-down point never exceeds
    ``max_travel``; longer or farther-traveling contacts are drags and are
    dropped. Ids are assigned in temporal order starting at 0, counting
    only the kept taps.

    Raises MalformedStreamError when phases are out of order (Up or Move
    without a prior Down, Down while a contact is already open, or a Down
    never closed by stream end), naming the offending sample index.
    """
    taps: list[TapRecord] = []
    run: list[TouchSample] = []
    prev_t = None
    for i, s in enumerate(stream):
        if prev_t is not None and s.t_us < prev_t:
            raise MalformedStreamError("timestamps must be non-decreasing", i)
        prev_t = s.t_us
        if s.phase is Phase.DOWN:
            if run:
                raise MalformedStreamError("touch-down while a contact is already open", i)
            run = [s]
        elif s.phase is Phase.MOVE:
            if not run:
                raise MalformedStreamError("touch-move without a prior touch-down", i)
            run.append(s)
        else:  # Phase.UP
            if not run:
                raise MalformedStreamError("touch-up without a prior touch-down", i)
            run.append(s)
            if _is_tap(run, max_tap_us, max_travel):
                taps.append(TapRecord.from_samples(len(taps), tuple(run)))
            run = []
    if run:
        raise MalformedStreamError(
            "touch-down never closed by stream end", len(stream) - len(run)
        )
    return taps


def _is_tap(run: list[TouchSample], max_tap_us: int, max_travel: float) -> bool:
    if run[-1].t_us - run[0].t_us > max_tap_us:
        return False
    x0, y0 = run[0].x, run[0].y
    for s in run:
        if abs(s.x - x0) > max_travel or abs(s.y - y0) > max_travel:
            return False
    return True


def label_taps(
    taps: list[TapRecord], threshold_us: int = DOUBLE_TAP_THRESHOLD_US
) -> list[LabeledTap]:
    """Assign ground-truth single/double-first labels.

    Tap i is DOUBLE_FIRST iff the next tap's touch-down follows tap i's
    touch-up by less than ``threshold_us`` and tap i is not already the
    trailing half of a double; the partner becomes role DOUBLE_SECOND.
    Chains of three or more rapid taps pair greedily left to right.
    """
    labeled: list[LabeledTap] = []
    i = 0
    n = len(taps)
    while i < n:
        if i + 1 < n and taps[i + 1].down.t_us - taps[i].up.t_us < threshold_us:
            labeled.append(LabeledTap(taps[i], TapLabel.DOUBLE_FIRST, TapRole.PRIMARY))
            labeled.append(LabeledTap(taps[i + 1], TapLabel.SINGLE, TapRole.DOUBLE_SECOND))
            i += 2
        else:
            labeled.append(LabeledTap(taps[i], TapLabel.SINGLE, TapRole.PRIMARY))
            i += 1
    return labeled


def conventional_detect(
    taps: list[TapRecord], threshold_us: int = DOUBLE_TAP_THRESHOLD_US
) -> list[DetectorEvent]:
    """Replay the fixed-threshold detector over segmented taps.

    Double pairs fire a double-tap event at the second tap's touch-up
    (attributed to the first tap); every other tap fires a single-tap
    event ``threshold_us`` after its touch-up, which is the single-tap
    latency this package exists to cut. Events come back sorted by
    emission time.
    """
    labeled = label_taps(taps, threshold_us)
    events: list[DetectorEvent] = []
    for i, lt in enumerate(labeled):
        if lt.role is TapRole.DOUBLE_SECOND:
            continue
        if lt.label is TapLabel.DOUBLE_FIRST:
            partner = labeled[i + 1].tap
            events.append(
                DetectorEvent(TapEventKind.DOUBLE_TAP_FIRED, partner.up.t_us, lt.tap.id)
            )
        else:
            events.append(
                DetectorEvent(
                    TapEventKind.SINGLE_TAP_FIRED,
                    lt.tap.up.t_us + threshold_us,
                    lt.tap.id,
                )
            )
    return sorted(events, key=lambda e: (e.emit_t_us, e.source_tap_id))
