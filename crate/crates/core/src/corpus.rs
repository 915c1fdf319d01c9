//! The shipped example diagrams, embedded at build time, and the published
//! single-edit mutations of each with the diagnostic code they must raise.

use crate::diagnostic::{Code, Diagnostic};
use crate::parser::parse;
use crate::taxonomy::builtin_taxonomy;
use crate::validator::validate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusFile {
    pub file_name: &'static str,
    pub title: &'static str,
    pub source: &'static str,
}

pub const CORPUS: [CorpusFile; 5] = [
    CorpusFile {
        file_name: "fig2_ml_pipeline.bxl",
        title: "training and applying a statistical model",
        source: include_str!("../../../corpus/fig2_ml_pipeline.bxl"),
    },
    CorpusFile {
        file_name: "fig3_mobile_learning.bxl",
        title: "a team learns partial models from a shipped code model",
        source: include_str!("../../../corpus/fig3_mobile_learning.bxl"),
    },
    CorpusFile {
        file_name: "fig4_distributed_planning.bxl",
        title: "job, pool and machine agents bidding for work",
        source: include_str!("../../../corpus/fig4_distributed_planning.bxl"),
    },
    CorpusFile {
        file_name: "fig5_bdi.bxl",
        title: "BDI agents sharing beliefs in a team",
        source: include_str!("../../../corpus/fig5_bdi.bxl"),
    },
    CorpusFile {
        file_name: "fig6_contractnet.bxl",
        title: "ContractNet between an initiator and a team",
        source: include_str!("../../../corpus/fig6_contractnet.bxl"),
    },
];

pub fn corpus_file(file_name: &str) -> Option<&'static CorpusFile> {
    CORPUS.iter().find(|c| c.file_name == file_name)
}

/// A single textual edit: replace the first occurrence of `find`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mutation {
    pub file_name: &'static str,
    pub description: &'static str,
    pub find: &'static str,
    pub replace: &'static str,
    pub expected: Code,
}

impl Mutation {
    /// The mutated text, or `None` when `find` does not occur.
    pub fn apply(&self, source: &str) -> Option<String> {
        source
            .contains(self.find)
            .then(|| source.replacen(self.find, self.replace, 1))
    }
}

/// Parse diagnostics if the text does not parse, otherwise validator findings.
pub fn check_source(text: &str) -> Vec<Diagnostic> {
    match parse(text) {
        Ok(doc) => validate(&doc, builtin_taxonomy()),
        Err(diags) => diags,
    }
}

macro_rules! mutations {
    ($($file:literal: $code:ident, $desc:literal, $find:literal => $replace:literal;)*) => {
        &[$(Mutation {
            file_name: $file,
            description: $desc,
            find: $find,
            replace: $replace,
            expected: Code::$code,
        }),*]
    };
}

pub const MUTATIONS: &[Mutation] = mutations! {
    "fig2_ml_pipeline.bxl": E004, "flip a flow edge into process-to-process",
        "classifier -> apply" => "train -> apply";
    "fig2_ml_pipeline.bxl": E001, "rename a concept to nonsense",
        "process train : infer:induce" => "process train : infer:wizardry";
    "fig2_ml_pipeline.bxl": E002, "relabel a model as a process",
        "model classifier : statistical" => "process classifier : statistical";
    "fig2_ml_pipeline.bxl": E003, "reverse the order of a label path",
        "process apply : infer:deduce" => "process apply : deduce:infer";
    "fig2_ml_pipeline.bxl": W001, "declare a node nothing connects to",
        "instance input : data" => "instance input : data\n    instance spare : data";
    "fig2_ml_pipeline.bxl": W002, "shrink a pattern frame",
        "pattern \"1a-train\" { classifier, train, training_data }" => "pattern \"1a-train\" { classifier, train }";
    "fig2_ml_pipeline.bxl": P004, "duplicate a node id",
        "instance input : data" => "instance input : data\n    instance input : data";
    "fig2_ml_pipeline.bxl": P005, "point an edge at an undeclared node",
        "input -> apply" => "inputs -> apply";
    "fig2_ml_pipeline.bxl": P001, "break an arrow",
        "train -> classifier" => "train > classifier";
    "fig2_ml_pipeline.bxl": P002, "remove the closing brace",
        "training_data }\n}\n" => "training_data }\n";

    "fig3_mobile_learning.bxl": E005, "replace a message label with a non-symbol",
        "requester => learners [request]" => "requester => learners [data]";
    "fig3_mobile_learning.bxl": P003, "strip a message label",
        "learners => requester [reply]" => "learners => requester";
    "fig3_mobile_learning.bxl": E004, "make a process initiate an actor",
        "requester -initiates-> integrate" => "integrate -initiates-> requester";
    "fig3_mobile_learning.bxl": E002, "declare the requester as an instance",
        "actor requester : agent" => "instance requester : agent";
    "fig3_mobile_learning.bxl": E001, "misspell a model concept",
        "model learning_code : statistical:code" => "model learning_code : statistical:cod";
    "fig3_mobile_learning.bxl": E003, "label path through an unrelated branch",
        "model partial_models : statistical:partial" => "model partial_models : semantic:partial";
    "fig3_mobile_learning.bxl": E006, "zoom into an undeclared badge",
        "pattern \"federated-learning\"" => "zoom ghost { learn }\n    pattern \"federated-learning\"";
    "fig3_mobile_learning.bxl": E007, "put an actor into an individual actor's zoom frame",
        "pattern \"federated-learning\"" => "zoom requester { learner1 }\n    pattern \"federated-learning\"";
    "fig3_mobile_learning.bxl": E008, "zoom frame partially overlapping the team",
        "pattern \"federated-learning\"" => "zoom integrate { learn, global_model }\n    pattern \"federated-learning\"";
    "fig3_mobile_learning.bxl": W002, "drop a member from the pattern frame",
        "learners, learning_code, local_data," => "learners, local_data,";

    "fig4_distributed_planning.bxl": E005, "label a work order with a model concept",
        "job_agent => pool_agent [workorder]" => "job_agent => pool_agent [capacity]";
    "fig4_distributed_planning.bxl": E004, "send a message to an instance",
        "pool_agent => machines [job]" => "pool_agent => job [job]";
    "fig4_distributed_planning.bxl": E004, "make influence point at an instance",
        "judge ~> capacity" => "judge ~> bid";
    "fig4_distributed_planning.bxl": E002, "declare the capacity model as an instance",
        "model capacity : statistical:capacity" => "instance capacity : statistical:capacity";
    "fig4_distributed_planning.bxl": E001, "unknown robot type",
        "actor machine1 : robot" => "actor machine1 : drone";
    "fig4_distributed_planning.bxl": E003, "machine label path from the wrong root",
        "actor machine2 : robot" => "actor machine2 : human:robot";
    "fig4_distributed_planning.bxl": E007, "machine zoom frame holding another machine",
        "pattern \"distributed-planning\"" => "zoom machine1 { machine2 }\n    pattern \"distributed-planning\"";
    "fig4_distributed_planning.bxl": E006, "zoom frame badged by a missing dispatcher",
        "pattern \"distributed-planning\"" => "zoom dispatcher { job }\n    pattern \"distributed-planning\"";
    "fig4_distributed_planning.bxl": P003, "strip the result label",
        "machines => job_agent [result]" => "machines => job_agent";
    "fig4_distributed_planning.bxl": W001, "declare a model nothing connects to",
        "model capacity : statistical:capacity" => "model capacity : statistical:capacity\n    model spare : statistical";

    "fig5_bdi.bxl": E004, "flip a flow edge into model-to-instance",
        "world_model -> classify" => "world_model -> beliefs";
    "fig5_bdi.bxl": E004, "make a speech act influence an instance",
        "speak ~> goal_model" => "speak ~> desires";
    "fig5_bdi.bxl": E005, "send a non-symbol between agents",
        "agent1 => agent2 [symbol]" => "agent1 => agent2 [data]";
    "fig5_bdi.bxl": E001, "misspell the intention model",
        "model plan_model : semantic:intention" => "model plan_model : semantic:intent";
    "fig5_bdi.bxl": E002, "declare the goal model as a process",
        "model goal_model : semantic:goal" => "process goal_model : semantic:goal";
    "fig5_bdi.bxl": E003, "classify under induction",
        "process classify : infer:classify" => "process classify : induce:classify";
    "fig5_bdi.bxl": E007, "agent zoom frame holding the other agent",
        "pattern \"bdi-loop\"" => "zoom agent1 { agent2 }\n    pattern \"bdi-loop\"";
    "fig5_bdi.bxl": E008, "zoom frames nesting in a cycle",
        "pattern \"bdi-loop\"" => "zoom sense { act }\n    zoom act { sense }\n    pattern \"bdi-loop\"";
    "fig5_bdi.bxl": W001, "drop the only edge of a context model",
        "    context -> predict\n" => "";
    "fig5_bdi.bxl": W002, "add a stray member to the loop's pattern frame",
        "pattern \"bdi-loop\" {" => "pattern \"bdi-loop\" { norms,";

    "fig6_contractnet.bxl": P003, "strip the cfp label",
        "initiator => contractors [cfp]" => "initiator => contractors";
    "fig6_contractnet.bxl": E005, "label a proposal with a process concept",
        "contractor1 => initiator [proposal]" => "contractor1 => initiator [infer]";
    "fig6_contractnet.bxl": E004, "let the initiator initiate an instance",
        "initiator -initiates-> evaluate" => "initiator -initiates-> award";
    "fig6_contractnet.bxl": E002, "declare the initiator as a model",
        "actor initiator : agent" => "model initiator : agent";
    "fig6_contractnet.bxl": E001, "rename a concept to nonsense",
        "model criteria : semantic:norm" => "model criteria : semantic:vibe";
    "fig6_contractnet.bxl": E003, "contractor label path under the wrong parent",
        "actor contractor1 : agent" => "actor contractor1 : human:agent";
    "fig6_contractnet.bxl": E007, "move an actor into the initiator's zoom frame",
        "pattern \"contract-net\"" => "zoom initiator { contractor3 }\n    pattern \"contract-net\"";
    "fig6_contractnet.bxl": P004, "reuse an id for a second node",
        "instance award : symbol:assignment" => "instance award : symbol:assignment\n    process award : infer";
    "fig6_contractnet.bxl": P005, "frame member that does not exist",
        "pattern \"contract-net\" { contractors, initiator }" => "pattern \"contract-net\" { contractor, initiator }";
    "fig6_contractnet.bxl": W002, "pattern frame without the team",
        "pattern \"contract-net\" { contractors, initiator }" => "pattern \"contract-net\" { initiator }";
};
