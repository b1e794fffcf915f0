import numpy as np
import pytest
from hypothesis import settings

from ca_harvest.corpus import Snippet
from ca_harvest.lexicon import Lexicon

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")

# Populated by tests/test_acceptance.py; one (criterion, status) pair per
# acceptance criterion, echoed after the run so the verdicts survive output
# capture.
ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for name, status in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"  {status:4s} {name}")

TERMS = frozenset(
    {
        "petition",
        "boycott",
        "march",
        "volunteer",
        "donate",
        "protest",
        "signed",
        "organize",
    }
)


@pytest.fixture
def lexicon() -> Lexicon:
    return Lexicon(terms=TERMS, name="test", source="inline")


def make_snippet(
    comment_id: str,
    text: str,
    community: str = "c",
    thread_id: str = "t",
    author_id: str = "a",
    anchor_index: int = 0,
    match_count: int = 2,
) -> Snippet:
    return Snippet(
        comment_id=comment_id,
        community=community,
        thread_id=thread_id,
        author_id=author_id,
        text=text,
        anchor_index=anchor_index,
        match_count=match_count,
    )


def unit(*components: float) -> np.ndarray:
    v = np.asarray(components, dtype=np.float64)
    return v / np.linalg.norm(v)
