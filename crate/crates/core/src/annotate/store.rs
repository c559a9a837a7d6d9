//! Durable task state for the annotation service.
//!
//! Layout under the data directory:
//!
//! ```text
//! journal/<task_id>.jsonl   one Annotation per line, append-only
//! review_queue.jsonl        skipped annotations awaiting a human look
//! ```
//!
//! Every accepted annotation is appended and fsynced before it becomes
//! visible; reopening the store replays the journals.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::{
    aggregate_task, AggregateOutcome, Annotation, AnnotationBatch, ChoiceId, VerificationTask, ANNOTATORS_PER_TASK,
    CANNOT_ANSWER, CANNOT_ANSWER_TEXT, NONE_OF_THE_ABOVE, NONE_OF_THE_ABOVE_TEXT,
};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown task {0}")]
    UnknownTask(String),
    #[error("annotator {annotator} already submitted task {task_id}")]
    AlreadySubmitted { task_id: String, annotator: String },
    #[error("task {0} already has all of its annotations")]
    TaskComplete(String),
    #[error("invalid annotation: {0}")]
    Invalid(String),
    #[error("{path}: {message}")]
    Load { path: PathBuf, message: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Open,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceView {
    pub id: ChoiceId,
    pub text: String,
}

/// What annotators see: no generated-correct marker and no other
/// annotators' selections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskView {
    pub task_id: String,
    pub image_id: String,
    pub stem: String,
    pub choices: Vec<ChoiceView>,
    pub status: TaskStatus,
    pub annotations_needed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task_id: String,
    pub status: TaskStatus,
    pub annotations_needed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReviewItem {
    task_id: String,
    annotation: Annotation,
}

#[derive(Default)]
struct TaskState {
    annotations: Vec<Annotation>,
}

impl TaskState {
    fn counted(&self) -> usize {
        self.annotations.iter().filter(|a| !a.is_skip()).count()
    }

    fn status(&self) -> TaskStatus {
        if self.counted() >= ANNOTATORS_PER_TASK {
            TaskStatus::Complete
        } else {
            TaskStatus::Open
        }
    }

    fn has(&self, annotator: &str) -> bool {
        self.annotations.iter().any(|a| a.annotator_id == annotator)
    }
}

struct TaskSlot {
    task: VerificationTask,
    state: Mutex<TaskState>,
}

pub struct AnnotationStore {
    dir: PathBuf,
    tasks: BTreeMap<String, TaskSlot>,
    review: Mutex<()>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

/// Reads JSON lines, naming the file and line on the first bad one.
fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line)
            .map_err(|e| StoreError::Load { path: path.to_path_buf(), message: format!("line {}: {e}", i + 1) })?;
        out.push(v);
    }
    Ok(out)
}

fn append_durable(path: &Path, line: &str) -> Result<(), StoreError> {
    let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(io_err(path))?;
    f.write_all(format!("{line}\n").as_bytes()).map_err(io_err(path))?;
    f.sync_data().map_err(io_err(path))
}

impl AnnotationStore {
    /// Loads tasks from a JSONL file and replays any journals in `dir`.
    pub fn open(tasks_path: &Path, dir: &Path) -> Result<Self, StoreError> {
        let tasks: Vec<VerificationTask> = read_jsonl(tasks_path)?;
        Self::with_tasks(tasks, dir)
    }

    pub fn with_tasks(tasks: Vec<VerificationTask>, dir: &Path) -> Result<Self, StoreError> {
        let journal_dir = dir.join("journal");
        fs::create_dir_all(&journal_dir).map_err(io_err(&journal_dir))?;
        let mut map = BTreeMap::new();
        for task in tasks {
            task.validate().map_err(|message| StoreError::Load { path: dir.to_path_buf(), message })?;
            let journal = journal_dir.join(format!("{}.jsonl", task.task_id));
            let annotations = if journal.exists() { read_jsonl(&journal)? } else { Vec::new() };
            let id = task.task_id.clone();
            let slot = TaskSlot { task, state: Mutex::new(TaskState { annotations }) };
            if map.insert(id.clone(), slot).is_some() {
                return Err(StoreError::Load { path: dir.to_path_buf(), message: format!("duplicate task id {id}") });
            }
        }
        Ok(AnnotationStore { dir: dir.to_path_buf(), tasks: map, review: Mutex::new(()) })
    }

    pub fn review_queue_path(&self) -> PathBuf {
        self.dir.join("review_queue.jsonl")
    }

    fn slot(&self, task_id: &str) -> Result<&TaskSlot, StoreError> {
        self.tasks.get(task_id).ok_or_else(|| StoreError::UnknownTask(task_id.to_string()))
    }

    fn view_of(slot: &TaskSlot, state: &TaskState) -> TaskView {
        let t = &slot.task;
        let mut choices: Vec<ChoiceView> =
            t.choices.iter().enumerate().map(|(i, text)| ChoiceView { id: i as ChoiceId, text: text.clone() }).collect();
        choices.push(ChoiceView { id: NONE_OF_THE_ABOVE, text: NONE_OF_THE_ABOVE_TEXT.into() });
        choices.push(ChoiceView { id: CANNOT_ANSWER, text: CANNOT_ANSWER_TEXT.into() });
        TaskView {
            task_id: t.task_id.clone(),
            image_id: t.image_id.clone(),
            stem: t.stem.clone(),
            choices,
            status: state.status(),
            annotations_needed: ANNOTATORS_PER_TASK.saturating_sub(state.counted()),
        }
    }

    pub fn task_ids(&self) -> impl Iterator<Item = &str> {
        self.tasks.keys().map(String::as_str)
    }

    pub fn view(&self, task_id: &str) -> Result<TaskView, StoreError> {
        let slot = self.slot(task_id)?;
        let state = slot.state.lock();
        Ok(Self::view_of(slot, &state))
    }

    /// First open task (by id) this annotator has not touched.
    pub fn next_for(&self, annotator: &str) -> Option<TaskView> {
        self.tasks.values().find_map(|slot| {
            let state = slot.state.lock();
            (state.status() == TaskStatus::Open && !state.has(annotator)).then(|| Self::view_of(slot, &state))
        })
    }

    /// Validates, journals (fsync), then applies one annotation.
    pub fn submit(&self, task_id: &str, annotation: Annotation) -> Result<TaskView, StoreError> {
        let slot = self.slot(task_id)?;
        annotation.validate().map_err(StoreError::Invalid)?;
        let mut state = slot.state.lock();
        if state.has(&annotation.annotator_id) {
            return Err(StoreError::AlreadySubmitted {
                task_id: task_id.to_string(),
                annotator: annotation.annotator_id,
            });
        }
        if state.status() == TaskStatus::Complete {
            return Err(StoreError::TaskComplete(task_id.to_string()));
        }
        let line = serde_json::to_string(&annotation).expect("annotation serializes");
        append_durable(&self.dir.join("journal").join(format!("{task_id}.jsonl")), &line)?;
        if annotation.is_skip() {
            let _guard = self.review.lock();
            let item = ReviewItem { task_id: task_id.to_string(), annotation: annotation.clone() };
            append_durable(&self.review_queue_path(), &serde_json::to_string(&item).expect("serializes"))?;
        }
        state.annotations.push(annotation);
        Ok(Self::view_of(slot, &state))
    }

    pub fn batch(&self, task_id: &str) -> Result<AnnotationBatch, StoreError> {
        let slot = self.slot(task_id)?;
        let state = slot.state.lock();
        Ok(AnnotationBatch { task_id: task_id.to_string(), annotations: state.annotations.clone() })
    }

    /// Every task's annotations, in task-id order.
    pub fn batches(&self) -> Vec<AnnotationBatch> {
        self.tasks
            .values()
            .map(|slot| AnnotationBatch { task_id: slot.task.task_id.clone(), annotations: slot.state.lock().annotations.clone() })
            .collect()
    }

    /// Generated-correct choice per task, for offline quality metrics only.
    pub fn generated_labels(&self) -> BTreeMap<String, ChoiceId> {
        self.tasks.iter().map(|(id, slot)| (id.clone(), slot.task.generated_label)).collect()
    }

    pub fn summaries(&self) -> Vec<TaskSummary> {
        self.tasks
            .values()
            .map(|slot| {
                let state = slot.state.lock();
                TaskSummary {
                    task_id: slot.task.task_id.clone(),
                    status: state.status(),
                    annotations_needed: ANNOTATORS_PER_TASK.saturating_sub(state.counted()),
                }
            })
            .collect()
    }

    /// Aggregated outcome of every complete task, sorted by task id.
    pub fn aggregate_complete(&self) -> Vec<AggregateOutcome> {
        self.tasks
            .values()
            .filter_map(|slot| {
                let state = slot.state.lock();
                if state.status() != TaskStatus::Complete {
                    return None;
                }
                let batch = AnnotationBatch { task_id: slot.task.task_id.clone(), annotations: state.annotations.clone() };
                aggregate_task(&slot.task, &batch).ok()
            })
            .collect()
    }

    /// Finalized questions as JSONL, in task-id order.
    pub fn export_jsonl(&self) -> String {
        let mut out = String::new();
        for outcome in self.aggregate_complete() {
            if let AggregateOutcome::Finalized(f) = outcome {
                out.push_str(&serde_json::to_string(&f.question).expect("question serializes"));
                out.push('\n');
            }
        }
        out
    }
}
