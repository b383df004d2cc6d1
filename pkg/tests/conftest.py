from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trustproto.harness import load_config, parse_config
from trustproto.trustwords import fixture_dictionary

BARE_KD_MITM = """\
agents: alice, bob
session: alice -> bob : keyDistribution
strategy: mitm alice bob
"""

FULL_PROTOCOL_MITM = """\
agents: alice, bob
session: alice -> bob : keyDistribution, handshake, greenExchange
strategy: mitm alice bob
"""

FULL_PROTOCOL_PASSIVE_2X2 = """\
agents: alice, bob, carol, dave
session: alice -> carol : keyDistribution, handshake, greenExchange
session: alice -> dave : keyDistribution, handshake, greenExchange
session: bob -> carol : keyDistribution, handshake, greenExchange
session: bob -> dave : keyDistribution, handshake, greenExchange
strategy: passive
"""

EXPLORE_SWEEP = """\
agents: alice, bob, carol, dave
session: alice -> carol : keyDistribution, handshake, greenExchange
session: alice -> dave : keyDistribution, handshake, greenExchange
session: bob -> carol : keyDistribution, handshake, greenExchange
session: bob -> dave : keyDistribution, handshake, greenExchange
strategy: explore
max-interventions: 3
max-term-depth: 3
branch-cap: 10000
"""


@pytest.fixture(scope="session")
def words_en():
    return fixture_dictionary()


@pytest.fixture
def bare_kd_mitm_config():
    return parse_config(BARE_KD_MITM)


@pytest.fixture
def full_mitm_config():
    return parse_config(FULL_PROTOCOL_MITM)


@pytest.fixture
def passive_2x2_config():
    return parse_config(FULL_PROTOCOL_PASSIVE_2X2)


@pytest.fixture
def config_file(tmp_path):
    def write(text: str, name: str = "scenario.conf") -> Path:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return write


@pytest.fixture
def load_config_file(config_file):
    def load(text: str):
        return load_config(config_file(text))
    return load
