"""LLM-as-a-judge client.

Sends a fixed four-criterion rubric prompt to an OpenAI-compatible chat
endpoint, parses the "Evaluation Form (scores ONLY)" reply into 0-100
integer scores, and caches verdicts on disk keyed by a digest of
(prompt, model, temperature).  The HTTP transport is injectable so the
whole loop is testable against a stubbed endpoint.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Aspect
from .harness import OVERALL_WEIGHTS

API_KEY_ENV = "CLAIMEVAL_JUDGE_API_KEY"

CRITERIA = {
    Aspect.COMPLETENESS: "Completeness of Essential Features",
    Aspect.CLARITY: "Conceptual Clarity",
    Aspect.CONSISTENCY: "Consistency in Terminology",
    Aspect.LINKAGE: "Technical Correctness of Feature Linkages",
}

PROMPT_TEMPLATE = """Instructions:
You will be given the draft claims and the referenced claims of the same patent. Your task is to rate the draft claims on four metrics using the referenced claims as the gold standard. Please make sure you read and understand these instructions carefully. Keep this document open while reviewing, and refer to it as needed.

Evaluation Criteria:
1. Completeness of Essential Features (0-100)
The extent to which the generated claims encapsulate all critical aspects of the invention.
0-20: Most essential features are missing or poorly described.
21-40: Some essential features are present but significant gaps remain.
41-60: Majority of essential features are covered but with minor omissions.
61-80: Almost all essential features are well described with very few gaps.
81-100: All essential features are thoroughly and comprehensively covered.

2. Conceptual Clarity (0-100)
The clarity and unambiguity of the language used in the claims.
0-20: Claims are very unclear and ambiguous.
21-40: Claims have significant clarity issues, making them difficult to understand.
41-60: Claims are mostly clear but contain some ambiguous language.
61-80: Claims are clear with minimal ambiguity.
81-100: Claims are exceptionally clear and completely unambiguous.

3. Consistency in Terminology (0-100)
The uniformity in the use of terms throughout the claims.
0-20: Terminology is highly inconsistent.
21-40: Significant inconsistencies in terminology.
41-60: Some inconsistencies in terminology but mostly uniform.
61-80: Terminology is largely consistent with minor inconsistencies.
81-100: Terminology is completely consistent throughout.

4. Technical Correctness of Feature Linkages (0-100)
The accuracy with which the features are interconnected and related.
0-20: Features are poorly linked with many inaccuracies.
21-40: Significant issues with the linkages of features.
41-60: Mostly accurate linkages with some incorrect connections.
61-80: Accurate linkages with minor inaccuracies.
81-100: Features are accurately and correctly linked throughout.

Evaluation Steps:
1. Read the referenced claims carefully and identify the invention's features. Assume the referenced claims have scores of 100 in all Evaluation Criteria.
2. Read the draft claims and compare them to the referenced claims.
3. Assign a score for each metric based on the Evaluation Criteria.

Example:
Referenced Claims: <<Claims>>
Draft Claims: <<Claims>>
Evaluation Form (scores ONLY):
- Completeness of Essential Features: X
- Conceptual Clarity: X
- Consistency in Terminology: X
- Technical Correctness of Feature Linkages: X
"""


class JudgeError(Exception):
    """Base class for judge failures."""


class JudgeParseError(JudgeError):
    """The reply did not contain a well-formed evaluation form."""

    def __init__(self, message, raw_text):
        super().__init__(message)
        self.raw_text = raw_text


class JudgeTransportError(JudgeError):
    """The endpoint could not be reached after all retries."""


@dataclass(frozen=True)
class JudgeConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 4
    cache_dir: str = ".judge_cache"

    def validate(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {self.max_in_flight}")


@dataclass(frozen=True)
class JudgeVerdict:
    scores: dict  # Aspect (four criteria) -> int in [0, 100]
    raw_text: str
    cached: bool = False

    def overall(self) -> float:
        """Weighted overall quality on the 0-100 scale."""
        total = sum(OVERALL_WEIGHTS[a] * self.scores[a] for a in OVERALL_WEIGHTS)
        return total / sum(OVERALL_WEIGHTS.values())


def build_prompt(reference: str, candidate: str) -> str:
    """Fill the two <<Claims>> slots: referenced claims first, draft second."""
    if not reference or not candidate:
        raise ValueError("reference and candidate must be non-empty")
    prompt = PROMPT_TEMPLATE.replace("<<Claims>>", reference, 1)
    return prompt.replace("<<Claims>>", candidate, 1)


def parse_judge_response(text: str) -> dict:
    """Extract the four criterion scores, tolerant of markdown decoration.

    Raises JudgeParseError on a missing criterion or a non-integer score;
    scores outside [0, 100] are rejected.
    """
    scores = {}
    for aspect, heading in CRITERIA.items():
        pattern = re.compile(
            re.escape(heading) + r"\**\s*[:：]\s*\**\s*(-?\d+(?:\.\d+)?)"
        )
        match = pattern.search(text)
        if match is None:
            raise JudgeParseError(f"missing criterion {heading!r} in reply", text)
        token = match.group(1)
        if "." in token:
            raise JudgeParseError(
                f"non-integer score {token!r} for criterion {heading!r}", text
            )
        value = int(token)
        if not 0 <= value <= 100:
            raise JudgeParseError(
                f"score {value} for criterion {heading!r} outside [0, 100]", text
            )
        scores[aspect] = value
    return scores


def render_verdict_form(scores: dict) -> str:
    """Canonical evaluation-form text for a score set (test fixture aid)."""
    lines = ["Evaluation Form (scores ONLY):"]
    for aspect, heading in CRITERIA.items():
        lines.append(f"- {heading}: {scores[aspect]}")
    return "\n".join(lines)


def _http_transport(config: JudgeConfig, payload: dict) -> str:
    import requests

    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(API_KEY_ENV)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    resp = requests.post(config.endpoint, json=payload, headers=headers,
                         timeout=config.timeout)
    resp.raise_for_status()
    body = resp.json()
    return body["choices"][0]["message"]["content"]


def _cache_key(prompt: str, model: str, temperature: float) -> str:
    blob = json.dumps({"prompt": prompt, "model": model,
                       "temperature": temperature}, sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def judge_pair(config: JudgeConfig, reference: str, candidate: str,
               transport=None, backoff: float = 1.0) -> JudgeVerdict:
    """Judge one (reference, candidate) pair, using the cache when possible.

    On a cache miss the request is retried with exponential backoff up to
    max_retries, then parsed; the raw reply is preserved on parse failure.
    """
    config.validate()
    if transport is None:
        transport = _http_transport
    prompt = build_prompt(reference, candidate)
    key = _cache_key(prompt, config.model, config.temperature)
    cache_dir = Path(config.cache_dir)
    cache_file = cache_dir / f"{key}.json"
    if cache_file.exists():
        entry = json.loads(cache_file.read_text(encoding="utf-8"))
        scores = {Aspect(k): v for k, v in entry["scores"].items()}
        return JudgeVerdict(scores=scores, raw_text=entry["raw_text"], cached=True)

    payload = {
        "model": config.model,
        "temperature": config.temperature,
        "messages": [{"role": "user", "content": prompt}],
    }
    last_error = None
    text = None
    for attempt in range(config.max_retries + 1):
        try:
            text = transport(config, payload)
            break
        except Exception as e:  # transport errors only; parse errors not retried
            last_error = e
            if attempt < config.max_retries:
                time.sleep(backoff * (2 ** attempt))
    if text is None:
        raise JudgeTransportError(
            f"endpoint failed after {config.max_retries + 1} attempts: {last_error}"
        ) from last_error

    scores = parse_judge_response(text)
    cache_dir.mkdir(parents=True, exist_ok=True)
    entry = {"scores": {a.value: v for a, v in scores.items()}, "raw_text": text}
    tmp = cache_file.with_suffix(".tmp")
    tmp.write_text(json.dumps(entry), encoding="utf-8")
    tmp.replace(cache_file)  # last writer wins; values are deterministic per key
    return JudgeVerdict(scores=scores, raw_text=text, cached=False)


class JudgeClient:
    """Callable judge with a bound on in-flight requests.

    Instances can be passed to harness.judge_scorer; judge_many fans out
    over a thread pool without exceeding max_in_flight concurrent
    transport calls.
    """

    def __init__(self, config: JudgeConfig, transport=None, backoff: float = 1.0):
        config.validate()
        self.config = config
        self.transport = transport
        self.backoff = backoff
        self._gate = threading.BoundedSemaphore(config.max_in_flight)

    def __call__(self, reference: str, candidate: str) -> JudgeVerdict:
        with self._gate:
            return judge_pair(self.config, reference, candidate,
                              transport=self.transport, backoff=self.backoff)

    def judge_many(self, pairs) -> list:
        """Judge a list of (reference, candidate) pairs, order preserved."""
        with ThreadPoolExecutor(max_workers=self.config.max_in_flight) as pool:
            return list(pool.map(lambda p: self(*p), pairs))
