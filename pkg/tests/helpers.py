"""Shared checks for simulation traces, used by unit and acceptance tests."""

from collections import defaultdict


def check_lifecycle_invariants(raw, cfg):
    """Assert the scaling lifecycle rules on a finished run.

    Covers: no busy worker is ever destroyed, creations happen only at
    arrival instants, at most one destruction per pull event, the pool
    stays within its bounds, and requests are conserved.
    """
    arrival_instants = set(raw.arrival_times)
    busy_intervals = defaultdict(list)  # wid -> [(start, end)]
    destroy_seqs = set()
    p = raw.p_initial
    p_min = cfg.control.target.p_min
    p_max = cfg.control.target.p_max
    if cfg.control.mode == "fixed":
        p_min = p_max = cfg.control.fixed_pool

    for act in raw.actions:
        kind = act[0]
        if kind == "dispatch":
            _, t, _seq, _rid, wid, demand = act
            assert demand > 0
            busy_intervals[wid].append((t, t + demand))
        elif kind == "create":
            _, t, _seq, count, _first = act
            assert count >= 1, "empty creation batch"
            assert t in arrival_instants, f"creation at {t} is not an arrival instant"
            p += count
            assert p <= p_max, f"pool grew past p_max: {p} > {p_max}"
        else:
            assert kind == "destroy"
            _, t, seq, wid = act
            for start, end in busy_intervals[wid]:
                assert not (start <= t < end), (
                    f"worker {wid} destroyed at {t} while busy on [{start}, {end})"
                )
            assert seq not in destroy_seqs, f"two destructions in pull event {seq}"
            destroy_seqs.add(seq)
            p -= 1
            assert p >= p_min, f"pool shrank past p_min: {p} < {p_min}"

    assert p == raw.p_final
    assert raw.creations - raw.destructions == raw.p_final - raw.p_initial
    assert raw.generated == raw.served + raw.w_end + raw.busy_end, (
        f"conservation broken: {raw.generated} != "
        f"{raw.served} + {raw.w_end} + {raw.busy_end}"
    )
    # pool size column must agree with the bounds at every sample
    for p_seen in raw.sample_p:
        assert p_min <= p_seen <= p_max


def raw_runs_equal(a, b):
    """Field-by-field comparison of two RawRun objects."""
    return [
        name
        for name in a.__dataclass_fields__
        if getattr(a, name) != getattr(b, name)
    ]
