"""Independent reference for the threat-risk fold and release times."""

import math

DAY = 86400.0
HALF_LIFE = 30 * DAY
WEIGHTS = {"Advisory": 0.2, "Suspected": 0.5, "Demonstrated": 1.0}
RUNGS = (0.25, 0.6, 0.9)
H = 0.05


def risk_at(events, label, when, half_life=HALF_LIFE):
    """Capped additive score with exponential decay, folded event by event."""
    r, t = 0.0, None
    for ev in events:
        if ev["model_time"] > when:
            break
        if ev["target"] != label:
            continue
        if t is not None:
            r *= 0.5 ** ((ev["model_time"] - t) / half_life)
        r = min(1.0, r + WEIGHTS[ev["severity"]])
        t = ev["model_time"]
    if t is None:
        return 0.0
    return r * 0.5 ** ((when - t) / half_life)


def release_time(start_time, start_risk, threshold, half_life=HALF_LIFE):
    return start_time + half_life * math.log2(start_risk / (threshold - H))
