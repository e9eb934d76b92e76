"""LLM-as-a-judge walkthrough against a stubbed endpoint: build the
rubric prompt, parse a reply, exercise retries and the disk cache, and
fold criterion scores into an overall number.

No network access is needed; the transport is a local stand-in for an
OpenAI-compatible chat endpoint.  Point JudgeConfig at a real endpoint
(and set CLAIMEVAL_JUDGE_API_KEY) to use a live model.

Run:  python3 demos/06_judge_stub.py
"""

import tempfile

from claimeval.corpus import Aspect
from claimeval.judge import (
    CRITERIA,
    JudgeClient,
    JudgeConfig,
    build_prompt,
    parse_judge_response,
    render_verdict_form,
)

# --- 1. The prompt embeds the reference claims and the draft claims
# into a fixed four-criterion rubric.
prompt = build_prompt(
    "1. A sensing device comprising a housing and a sensor.",
    "1. A device comprising a housing and a sensing element.",
)
print("criteria in prompt:")
for heading in CRITERIA.values():
    assert heading in prompt
    print("  -", heading)

# --- 2. The stub replays a well-formed evaluation form.  A flaky first
# attempt shows the retry loop in action.
scores = {Aspect.COMPLETENESS: 80, Aspect.CLARITY: 75,
          Aspect.CONSISTENCY: 85, Aspect.LINKAGE: 74}
attempts = []


def stub_transport(config, payload):
    attempts.append(1)
    if len(attempts) == 1:
        raise ConnectionError("transient network hiccup (stubbed)")
    return render_verdict_form(scores)


print("\nparsed form:", parse_judge_response(render_verdict_form(scores)))

with tempfile.TemporaryDirectory() as tmp:
    config = JudgeConfig(endpoint="http://localhost:9/v1/chat/completions",
                         model="stub-judge", cache_dir=tmp, max_in_flight=2)
    client = JudgeClient(config, transport=stub_transport, backoff=0)

    verdict = client("reference claims text", "draft claims text")
    print(f"verdict after {len(attempts)} transport attempts: "
          f"{ {a.value: v for a, v in verdict.scores.items()} }")
    # weighted overall: (80*4 + 75*2 + 85*2 + 74*3) / 11
    print(f"overall quality: {verdict.overall():.3f}  (= 862/11)")

    # --- 3. Identical requests hit the disk cache instead of the
    # endpoint: the attempt counter does not move.
    before = len(attempts)
    again = client("reference claims text", "draft claims text")
    print(f"cache hit: cached={again.cached}, "
          f"extra transport calls={len(attempts) - before}")

    # --- 4. judge_many fans out over a thread pool while keeping at
    # most max_in_flight requests active.
    pairs = [("reference claims text", f"draft variant {i}") for i in range(4)]
    verdicts = client.judge_many(pairs)
    print(f"judged {len(verdicts)} pairs, overall scores: "
          f"{[round(v.overall(), 1) for v in verdicts]}")
