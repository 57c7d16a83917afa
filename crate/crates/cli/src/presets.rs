use posys::kyp::KypMode;
use posys::model::{KypModel, ModelFile, StateSpaceModel, SynthesisModel, TransferMatrixModel};
use posys::posdom::inertial_chain;
use posys::power::{four_node_network, two_node_network, DeskDefaults};
use posys::presets::{buffer_network, formation_problem, transport_problem, BufferRates, FORMATION_CASES};
use posys::{Error, Matrix, Result, TimeDomain};

pub const NAMES: [&str; 9] = [
    "buffers",
    "transport",
    "formation-unit",
    "formation-front",
    "formation-rear",
    "formation-inertial",
    "unstabilizable",
    "four-node",
    "two-node",
];

pub fn unstabilizable() -> KypModel {
    KypModel {
        a: Matrix::from_rows(&[[-1.0]]),
        b: Matrix::from_rows(&[[0.0]]),
        q: Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]),
        time_domain: TimeDomain::Continuous,
        mode: Some(KypMode::NonStrict),
    }
}

pub fn buffers() -> StateSpaceModel {
    StateSpaceModel {
        a: buffer_network(BufferRates::default()),
        b: Matrix::zeros(4, 0),
        c: Matrix::zeros(0, 4),
        d: Matrix::zeros(0, 0),
        time_domain: TimeDomain::Continuous,
        xi: None,
    }
}

pub fn model(name: &str) -> Result<ModelFile> {
    let formation = |case: usize| ModelFile::Synthesis(SynthesisModel::from_problem(&formation_problem(&FORMATION_CASES[case].b)));
    Ok(match name {
        "buffers" => ModelFile::StateSpace(buffers()),
        "transport" => ModelFile::Synthesis(SynthesisModel::from_problem(&transport_problem())),
        "formation-unit" => formation(0),
        "formation-front" => formation(1),
        "formation-rear" => formation(2),
        "formation-inertial" => ModelFile::TransferMatrix(TransferMatrixModel {
            matrix: None,
            problem: Some(inertial_chain(4, 1.0, 1.0)?.problem),
            gains: None,
        }),
        "unstabilizable" => ModelFile::Kyp(unstabilizable()),
        "four-node" => ModelFile::PowerNetwork(four_node_network(DeskDefaults::default())),
        "two-node" => ModelFile::PowerNetwork(two_node_network(0.3, 0.1, 0.9, 1.1)),
        other => {
            return Err(Error::InvalidArgument(format!("unknown preset `{other}`; available: {}", NAMES.join(", "))))
        }
    })
}
