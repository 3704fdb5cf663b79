"""Echo-fidelity simulations of noisy random circuits (C++ core)."""

from ._qecho import (
    ConfigError,
    InsufficientData,
    Layout,
    NoiseModel,
    NumericalFailure,
    PLANCK_LENGTH,
    PLANCK_TIME,
    ResourceLimit,
    __version__,
    chain,
    cli,
    detect_two_regime,
    drift_fidelity,
    emqm_qubit_bound,
    entanglement_fidelity,
    equal_trace_basis,
    fit_exponential,
    grid,
    haar_unitary,
    mean_gate_prediction,
    noise_channel,
    noise_model,
    noise_model_from_json,
    recommended_max_depth,
    run_campaign,
    run_mps_campaign,
    statistical_reach,
    superoperator,
    twirl_prediction,
)


def fit_table(table, subtract_floor=True, **kwargs):
    """Fits the table returned by run_campaign / run_mps_campaign."""
    return fit_exponential(
        table["depth"].tolist(),
        table["mean"].tolist(),
        table["stderr"].tolist(),
        num_qubits=table["num_qubits"],
        subtract_floor=subtract_floor,
        **kwargs,
    )
