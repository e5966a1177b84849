"""kexlab: a deterministic laboratory for a resistive key-distribution loop.

Simulates the honest two-party exchange over a shared-resistor loop, a
passive eavesdropper who records the public line, the brute-force entropy
accounting that classifies the scheme as a key expander, the hardware-free
digital equivalent, and the current-injection attack with its
authenticated-comparison defense.
"""

from .circuit import (
    Current,
    LineObservation,
    LoopParams,
    NoisyObservation,
    Resistance,
    Voltage,
    differential_slope,
    loop_params,
    observe_with_noise,
    perturbed_pair,
    solve_loop,
)
from .config import ExperimentConfig, config_hash, load_config, parse_config_text
from .defense import (
    DefenseVerdict,
    EndpointReport,
    InjectionScenario,
    Reason,
    forge_passing_pair,
    make_report,
    solve_loop_with_injection,
    verify_round,
)
from .eavesdropper import (
    CrackResult,
    EveRecording,
    XValues,
    eve_crack_with_secret,
    eve_recover_voltages,
    eve_x_values,
    transient_slope,
    transient_view,
)
from .entropy import (
    EntropyPoint,
    PosteriorReport,
    brute_force_posterior,
    entropy_vs_rounds,
    posterior_from_x_pairs,
    posterior_trajectory,
)
from .errors import (
    BothDeltasNonzero,
    BothDeltasZero,
    ConfigInvalid,
    CrossCheckFailed,
    FormatError,
    IncompleteRound,
    KexlabError,
    NegativeResistance,
    OutOfRange,
    RoundPhaseMismatch,
    ValueNotInPalette,
    ZeroCurrentDelta,
)
from .expander import ExpanderMessage, equivalence_check, expand, recover_partner_randoms
from .harness import RunResult, replay_attack, run_experiment
from .protocol import (
    Key,
    Palette,
    Party,
    PartySecrets,
    Phase,
    Role,
    RoundRecord,
    SharedSecret,
    Transcript,
    TranscriptEntry,
    alice_extract,
    bob_extract,
    derive_key,
    derive_key_from_pairs,
    draw_round_secrets,
    run_round,
)

__version__ = "0.1.0"
