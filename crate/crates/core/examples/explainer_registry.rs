//! Registers a custom explainer next to the shipped mocks and invokes it.

use ee_dialogue::bt::Value;
use ee_dialogue::registry::{
    ExplainerAdapter, ExplainerManifest, ExplanationBody, ExplanationPayload, Feature, Modality, Params,
    Registry, Target,
};

/// Ranks features by the magnitude of their numeric value.
struct Magnitude;

impl ExplainerAdapter for Magnitude {
    fn explain(&self, target: &Target, _params: &Params) -> Result<ExplanationPayload, String> {
        let mut weights: Vec<(String, f64)> = target
            .features
            .iter()
            .filter_map(|f| f.value.as_f64().map(|v| (f.name.clone(), v.abs())))
            .collect();
        if weights.is_empty() {
            return Err("no numeric features".into());
        }
        weights.sort_by(|a, b| b.1.total_cmp(&a.1));
        let rendering = format!("The largest input is {}.", weights[0].0);
        Ok(ExplanationPayload {
            explainer_id: "magnitude".into(),
            rendering,
            body: ExplanationBody::Attribution { weights },
            attachments: vec![],
            provenance: "example".into(),
        })
    }
}

fn main() {
    let mut registry = Registry::with_mocks();
    registry
        .register(
            ExplainerManifest {
                explainer_id: "magnitude".into(),
                intents: vec!["transparency".into()],
                target_kind: Some("tabular".into()),
                modality: Modality::Text,
            },
            Box::new(Magnitude),
        )
        .unwrap();

    for m in registry.manifests() {
        println!("{:<24} {:?} serves {}", m.explainer_id, m.modality, m.intents.join(", "));
    }

    let mut applicant = Target::bare("applicant-17");
    applicant.kind = Some("tabular".into());
    applicant.features = vec![
        Feature { name: "income".into(), value: Value::from(41_000.0) },
        Feature { name: "loan_amount".into(), value: Value::from(120_000.0) },
    ];
    let out = registry.invoke("magnitude", &applicant, &Params::new()).unwrap();
    println!("\n{}", out.rendering);

    let mut image = Target::bare("xray-3");
    image.kind = Some("image".into());
    match registry.invoke("magnitude", &image, &Params::new()) {
        Ok(_) => unreachable!(),
        Err(e) => println!("rejected: {e}"),
    }
}
