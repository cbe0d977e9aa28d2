import random

import pytest

import scenelang as sl

_acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance results")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log():
    """Recorder for one PASS/FAIL line per acceptance criterion."""

    def record(criterion: int, ok: bool, detail: str) -> None:
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        _acceptance_lines.append(line)
        print(line)

    return record


@pytest.fixture(scope="session")
def clevr():
    return sl.builtin_profile("clevr")


@pytest.fixture(scope="session")
def minecraft():
    return sl.builtin_profile("minecraft")


@pytest.fixture(scope="session")
def clevr_catalog(clevr):
    return sl.build_catalog(clevr)


@pytest.fixture(scope="session")
def clevr_templates(clevr):
    return sl.builtin_template_pack("clevr", clevr)


@pytest.fixture(scope="session")
def minecraft_templates(minecraft):
    return sl.builtin_template_pack("minecraft", minecraft)


@pytest.fixture
def tiny_scene():
    # 3 objects on a hand-checkable L: 1 sits right of 0, 2 sits behind 0
    objs = (
        sl.ObjectRecord(
            id=0,
            entries={"color": "red", "shape": "cube", "material": "rubber", "size": "small"},
            position=(0.0, 0.0, 0.5),
        ),
        sl.ObjectRecord(
            id=1,
            entries={"color": "red", "shape": "sphere", "material": "metal", "size": "large"},
            position=(2.0, 0.0, 0.5),
        ),
        sl.ObjectRecord(
            id=2,
            entries={"color": "blue", "shape": "cube", "material": "metal", "size": "small"},
            position=(0.0, 2.0, 0.5),
        ),
    )
    return sl.Scene(scene_id="tiny", profile_name="clevr", objects=objs)


def seeded_scene(profile, seed, **kwargs):
    return sl.sample_scene(profile, random.Random(seed), scene_id=f"s{seed}", **kwargs)
