"""Executable model of opportunistic key distribution with a word-comparison
handshake, checked against a network attacker.

The package has four layers: a symbolic term algebra (`terms`), the word
encoding of key fingerprints (`trustwords`), the honest per-device engine
(`engine`) plus the attacker (`adversary`), and on top a scenario harness
(`harness`) whose traces are judged by the property checkers
(`properties`). The `trustproto` command line ties them together.
"""

from .adversary import (Adversary, Deliver, Derivation, Drop, Explore,
                        Inject, Knowledge, Passive, Replace, ScriptedMitm)
from .engine import (DisplayedMessage, HandshakeOutcome, IdentityRecord,
                     NameSupply, NoPeerKey, PeerState, Rating, WireMessage,
                     complete_handshake)
from .harness import (Bounds, ConfigError, ScenarioConfig, SessionSpec, Trace,
                      explore_scenario, load_config, load_trace, parse_config,
                      run_scenario, write_trace)
from .properties import (PROPERTY_NAMES, PropertyReport, Query, Verdict,
                         check_all, check_correspondence, check_property)
from .terms import (AEnc, DecryptError, FreshName, NotASignature, Pair,
                    ProjError, PubKey, SecretKey, SigError, Sign, Term,
                    WordListTerm, adec, aenc, get_mssg, pair, render_term,
                    sign, verif_sign)
from .trustwords import (Dictionary, InvalidHex, WordList,
                         combine_fingerprints, fixture_dictionary,
                         load_dictionary, map_to_words, trustwords,
                         trustwords_match)

__version__ = "0.1.0"
