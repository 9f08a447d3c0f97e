//! On-disk JSON formats for games and provers.
//!
//! Floating-point entries are stored as decimal strings with 17 significant
//! digits, which round-trips every finite `f64` bit for bit — a written
//! game reloads into exactly the matrices it came from, so file-based
//! workflows never accumulate drift. Loading validates everything the
//! in-memory constructors validate (unitarity, label discipline, move
//! counts), so a hand-edited file cannot smuggle in a non-game.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::DqipVerifier;
use crate::hermitian::{c64, ComplexMatrix, SpaceLayout, UnitaryMatrix};

use super::Role;

const FORMAT_VERSION: u32 = 1;

/// Dense complex matrix as `[re, im]` decimal-string pairs, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[String; 2]>,
}

impl MatrixData {
    pub fn encode(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                entries.push([write_f64(m[(r, c)].re), write_f64(m[(r, c)].im)]);
            }
        }
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn decode(&self) -> Result<ComplexMatrix> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::Format(format!(
                "matrix declared {}×{} but carries {} entries",
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (k, [re, im]) in self.entries.iter().enumerate() {
            m[(k / self.cols, k % self.cols)] = c64(read_f64(re)?, read_f64(im)?);
        }
        Ok(m)
    }
}

fn write_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_f64(s: &str) -> Result<f64> {
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Format(format!("not a decimal number: {s:?}")))?;
    if !x.is_finite() {
        return Err(Error::Format(format!("non-finite matrix entry: {s:?}")));
    }
    Ok(x)
}

/// A complete verifier: layout, role assignments, and all round unitaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub version: u32,
    pub layout: Vec<(String, usize)>,
    pub yes_message: Vec<String>,
    pub no_message: Vec<String>,
    pub output: String,
    pub yes_rounds: Vec<MatrixData>,
    pub no_rounds: Vec<MatrixData>,
}

impl GameFile {
    pub fn from_verifier(verifier: &DqipVerifier) -> Self {
        Self {
            version: FORMAT_VERSION,
            layout: verifier.layout().factors().to_vec(),
            yes_message: verifier
                .yes_message_labels()
                .into_iter()
                .map(str::to_string)
                .collect(),
            no_message: verifier
                .no_message_labels()
                .into_iter()
                .map(str::to_string)
                .collect(),
            output: verifier.output_label().to_string(),
            yes_rounds: verifier.yes_rounds().iter().map(|u| MatrixData::encode(u)).collect(),
            no_rounds: verifier.no_rounds().iter().map(|u| MatrixData::encode(u)).collect(),
        }
    }

    pub fn to_verifier(&self) -> Result<DqipVerifier> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "game file version {} unsupported (this build reads {FORMAT_VERSION})",
                self.version
            )));
        }
        let layout = SpaceLayout::new(self.layout.clone())?;
        let decode_all = |mats: &[MatrixData]| -> Result<Vec<UnitaryMatrix>> {
            mats.iter().map(|m| UnitaryMatrix::new(m.decode()?)).collect()
        };
        DqipVerifier::new(
            decode_all(&self.yes_rounds)?,
            decode_all(&self.no_rounds)?,
            layout,
            &self.yes_message.iter().map(String::as_str).collect::<Vec<_>>(),
            &self.no_message.iter().map(String::as_str).collect::<Vec<_>>(),
            &self.output,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// One prover's strategy: its role, the message factors it claims (in the
/// game's order), its private environment, and one unitary per move.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProverFile {
    pub version: u32,
    /// `"yes"` or `"no"`; checked against the game on load so a strategy
    /// for one side cannot be played as the other.
    pub role: String,
    pub message: Vec<String>,
    pub env: Vec<(String, usize)>,
    pub moves: Vec<MatrixData>,
}

impl ProverFile {
    pub fn from_moves(
        role: Role,
        verifier: &DqipVerifier,
        moves: &[UnitaryMatrix],
        env: &SpaceLayout,
    ) -> Self {
        let message = match role {
            Role::Yes => verifier.yes_message_labels(),
            Role::No => verifier.no_message_labels(),
        };
        Self {
            version: FORMAT_VERSION,
            role: match role {
                Role::Yes => "yes".to_string(),
                Role::No => "no".to_string(),
            },
            message: message.into_iter().map(str::to_string).collect(),
            env: env.factors().to_vec(),
            moves: moves.iter().map(|u| MatrixData::encode(u)).collect(),
        }
    }

    /// Validates this strategy against `verifier` and returns it in playable
    /// form. The declared role must name a side, the declared message
    /// factors must be exactly that side's factors in the game's order, the
    /// move count must fit one of the two accepted lengths (own phase only,
    /// or one move per round), and every move must be unitary of the right
    /// dimension.
    pub fn to_moves(
        &self,
        verifier: &DqipVerifier,
    ) -> Result<(Role, Vec<UnitaryMatrix>, SpaceLayout)> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "prover file version {} unsupported (this build reads {FORMAT_VERSION})",
                self.version
            )));
        }
        let role = match self.role.as_str() {
            "yes" => Role::Yes,
            "no" => Role::No,
            other => {
                return Err(Error::Format(format!(
                    "role must be \"yes\" or \"no\", got {other:?}"
                )))
            }
        };
        let expected = match role {
            Role::Yes => verifier.yes_message_labels(),
            Role::No => verifier.no_message_labels(),
        };
        let claimed: Vec<&str> = self.message.iter().map(String::as_str).collect();
        if claimed != expected {
            return Err(Error::Format(format!(
                "a {} prover plays {expected:?}, file claims {claimed:?}",
                self.role
            )));
        }
        let (own_phase, every_round) = match role {
            Role::Yes => (verifier.r1(), verifier.r1() + verifier.r2()),
            Role::No => (verifier.r2(), verifier.r1() + verifier.r2()),
        };
        if self.moves.len() != own_phase && self.moves.len() != every_round {
            return Err(Error::Format(format!(
                "a {} prover moves {own_phase} or {every_round} times, file has {}",
                self.role,
                self.moves.len()
            )));
        }
        let env = SpaceLayout::new(self.env.clone())?;
        let move_dim = verifier.layout().dim_of_all(&expected)? * env.total_dim();
        let moves: Vec<UnitaryMatrix> = self
            .moves
            .iter()
            .map(|m| UnitaryMatrix::new(m.decode()?))
            .collect::<Result<_>>()?;
        for u in &moves {
            if u.dim() != move_dim {
                return Err(Error::Dimension(format!(
                    "move is {}-dimensional, message ⊗ environment gives {move_dim}",
                    u.dim()
                )));
            }
        }
        Ok((role, moves, env))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Format(e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{coin_guessing_game, u, unit_env};
    use crate::testutil::{random_unitary, rng};
    use rand::Rng;

    #[test]
    fn every_finite_double_survives_the_decimal_round_trip() {
        let mut r = rng(2024);
        let mut checked = 0;
        while checked < 1000 {
            let x = f64::from_bits(r.random::<u64>());
            if !x.is_finite() {
                continue;
            }
            let back = read_f64(&write_f64(x)).unwrap();
            assert_eq!(
                x.to_bits(),
                back.to_bits(),
                "{x:?} reread as {back:?}"
            );
            checked += 1;
        }
    }

    #[test]
    fn game_files_reproduce_the_verifier_bit_for_bit() {
        let game = coin_guessing_game();
        let text = serde_json::to_string_pretty(&GameFile::from_verifier(&game)).unwrap();
        let parsed: GameFile = serde_json::from_str(&text).unwrap();
        let back = parsed.to_verifier().unwrap();

        assert_eq!(back.layout().factors(), game.layout().factors());
        assert_eq!(back.yes_message_labels(), game.yes_message_labels());
        assert_eq!(back.no_message_labels(), game.no_message_labels());
        assert_eq!(back.output_label(), game.output_label());
        let pairs = game
            .yes_rounds()
            .iter()
            .zip(back.yes_rounds())
            .chain(game.no_rounds().iter().zip(back.no_rounds()));
        for (a, b) in pairs {
            for (x, y) in a.iter().zip(b.iter()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn saving_and_loading_give_back_the_same_document() {
        let dir = std::env::temp_dir().join(format!("refgame-file-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("game.json");
        let file = GameFile::from_verifier(&coin_guessing_game());
        file.save(&path).unwrap();
        let reread = GameFile::load(&path).unwrap();
        assert_eq!(serde_json::to_string(&file).unwrap(), serde_json::to_string(&reread).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn prover_files_enforce_the_role_markers() {
        let game = coin_guessing_game();
        let moves = vec![u(random_unitary(2, 5))];
        let env = unit_env("mem");
        let file = ProverFile::from_moves(Role::Yes, &game, &moves, &env);
        let (role, back, _) = file.to_moves(&game).unwrap();
        assert_eq!(role, Role::Yes);
        assert_eq!(back.len(), 1);

        // Same moves, relabelled as the other side: the message factors no
        // longer match the no-prover's and the file is refused.
        let mut crossed = file.clone();
        crossed.role = "no".to_string();
        assert!(crossed.to_moves(&game).is_err());

        let mut nonsense = file.clone();
        nonsense.role = "referee".to_string();
        assert!(nonsense.to_moves(&game).is_err());

        // Two moves is the legitimate every-round form; three fits nothing.
        let mut padded = file.clone();
        padded.moves.push(padded.moves[0].clone());
        assert!(padded.to_moves(&game).is_ok());
        let mut too_many = padded.clone();
        too_many.moves.push(too_many.moves[0].clone());
        assert!(too_many.to_moves(&game).is_err());

        // Corrupt one entry: the matrix stops being unitary.
        let mut corrupt = file.clone();
        corrupt.moves[0].entries[0] = [write_f64(0.5), write_f64(0.0)];
        assert!(corrupt.to_moves(&game).is_err());
    }
}
