"""Prints a per-criterion verdict line for the acceptance suite."""

import re

CRITERIA = {
    "c01": "parameter counts reproduce the published scaling grid (+-3%)",
    "c02": "baseline FLOPs within 10% and params within 3% of published",
    "c03": "closed-form receptive field equals the impulse-probe oracle",
    "c04": "params/MACs invariant to dilation base; receptive field grows",
    "c05": "kernels match brute-force oracles (1e-5 rel, 100+ instances)",
    "c06": "end-to-end separation contract (shapes, determinism, <10 s, masks)",
    "c07": "SI-SDR metric suite (scale invariance, hand cases, PIT oracle)",
    "c08": "baseline infeasible on MCUs, feasible on Raspberry Pi memory",
    "c09": "bit-exact weight/WAV round trips; CRC rejects 100/100 bit flips",
    "c10": "reference metadata embedded verbatim",
}

_NODE_RE = re.compile(r"test_acceptance\.py::test_(c\d{2})_")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    stats = terminalreporter.stats
    outcomes = {}
    for key in ("passed", "failed", "xfailed", "xpassed", "error"):
        for report in stats.get(key, []):
            match = _NODE_RE.search(getattr(report, "nodeid", ""))
            if match:
                criterion = match.group(1)
                outcomes.setdefault(criterion, []).append(key)
    if not outcomes:
        return

    terminalreporter.section("acceptance criteria")
    for criterion in sorted(CRITERIA):
        results = outcomes.get(criterion)
        if results is None:
            continue
        bad = [r for r in results if r in ("failed", "error", "xpassed")]
        verdict = "FAIL" if bad else "PASS"
        counts = ", ".join(
            f"{results.count(k)} {k}" for k in ("passed", "xfailed", "failed",
                                                "error", "xpassed")
            if results.count(k)
        )
        note = ""
        if criterion == "c01" and results.count("xfailed"):
            note = " [known published-value erratum for (6,3,64), see ledger]"
        terminalreporter.write_line(
            f"{verdict}  {criterion}: {CRITERIA[criterion]} ({counts}){note}"
        )
