import numpy as np
import pytest
from PIL import Image


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_frames(directory, frames, prefix="in", suffix=".png"):
    directory.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames, start=1):
        Image.fromarray(np.asarray(frame, dtype=np.uint8)).save(directory / f"{prefix}{i:06d}{suffix}")
    return directory


def write_video(root, frames, gts, roi=None):
    """CDnet-style video directory: input/, groundtruth/, temporalROI.txt."""
    write_frames(root / "input", frames)
    write_frames(root / "groundtruth", gts, prefix="gt")
    first, last = roi or (1, len(frames))
    (root / "temporalROI.txt").write_text(f"{first} {last}\n")
    return root


# ------------------------------------------------------------ shared runs

def run_video(frames, gts, config=None):
    """Process a synthetic video; returns (results, per-frame confusions)."""
    from cuedetect.config import PipelineConfig
    from cuedetect.evaluation import accumulate
    from cuedetect.pipeline import run

    results, confusions = [], []
    for result, gt in zip(run(frames, config or PipelineConfig()), gts):
        results.append(result)
        confusions.append(accumulate(result.mask, gt))
    return results, confusions


@pytest.fixture(scope="session")
def scene_cut_run():
    import time

    from cuedetect.synthetic import scene_cut

    frames, gts = scene_cut(n_frames=400, cut=200)
    start = time.perf_counter()
    results, confusions = run_video(frames, gts)
    return {"cut": 200, "results": results, "confusions": confusions,
            "seconds": time.perf_counter() - start}


# ------------------------------------------------------------ acceptance summary

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
