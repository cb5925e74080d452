//! Prompt templates. Every prompt the pipelines send to a language model is
//! rendered here, so golden tests pin the exact bytes.

fn list(items: &[&str]) -> String {
    items.join(", ")
}

/// `a, b, or c`; a single item stands alone.
fn or_list(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{}, or {last}", init.join(", ")),
    }
}

pub fn activities(places: &[&str], objects: &[&str]) -> String {
    format!("Places: {}. Objects: {}. Activities:", list(places), list(objects))
}

pub fn more_objects(places: &[&str], activity: &str) -> String {
    format!("Places: {}. If I am {activity}, objects that I am likely to see include:", list(places))
}

pub fn more_places(objects: &[&str], activity: &str) -> String {
    format!("Objects: {}. If I am {activity}, places that I am likely to be in include:", list(objects))
}

pub fn moment_summary(places: &[&str], objects: &[&str], activity: &str) -> String {
    format!(
        "I am in a {}. I see a {}. I am {activity}. Question: What am I doing? Answer: I am most likely",
        list(places),
        list(objects)
    )
}

pub fn possible_sounds(places: &[&str], objects: &[&str], activity: &str, n: usize) -> String {
    format!("Places: {}. Objects: {}.  Activities: {activity}.  {n} Possible Sounds:", list(places), list(objects))
}

pub fn moment_summary_with_sound(place: &str, objects: &[&str], sound: &str, activity: &str) -> String {
    format!("I am in a: {place}. I see a: {}.  I think I hear {sound} I am: {activity}.  Summary: I am most likely", list(objects))
}

pub fn image_caption(image_type: &str, people: &str, places: &[&str], objects: &[&str]) -> String {
    format!(
        "I am an intelligent image captioning bot.\n\
         This image is a {image_type}. There {people}.\n\
         I think this photo was taken at a {}.  I think there might be a {} in this {image_type}.\n\
         A creative short caption I can generate to describe this image is:",
        or_list(places),
        list(objects)
    )
}

pub const VIDEO_CAPTION_LEAD: &str = "In this video,";

pub fn video_caption(transcript: &str) -> String {
    format!(
        "I am an intelligent video captioning bot.\n\
         I hear a person saying: \"{transcript}\".\n\
         Q: What's a short video caption for this video? A: {VIDEO_CAPTION_LEAD}"
    )
}

pub fn question(history: &str, question: &str) -> String {
    format!("{history}\nQ: {question}\nA:")
}

pub fn explanation(history: &str, question: &str, answer: &str) -> String {
    format!("{history}\nQ: {question}\nA: {answer} This is because:")
}

pub fn day_summary(history: &str) -> String {
    format!("{history}\nSummary of my day:")
}

pub fn chunk_summary(history: &str) -> String {
    format!("{history}\nSummary of this part of my day:")
}

pub fn forecast(history: &str, first_clock: &str) -> String {
    format!("{history}\n{first_clock}:")
}

pub fn correction(context: &str, original: &str, correction: &str) -> String {
    format!("{context}\nOriginal Summary: {original}\nCorrections: {correction}\nCorrected Summary:")
}

/// Context block describing one moment for a correction prompt.
pub fn correction_context(places: &[&str], objects: &[&str], suggested: &[&str], chosen: &str) -> String {
    format!(
        "Context: Where am I? {}. What do I see? {}. What am I doing? Commonsense suggests: {}. Most likely: {chosen}.",
        list(places),
        list(objects),
        list(suggested)
    )
}

pub fn route(few_shot: &str, question: &str) -> String {
    format!("{}\nQ: {question}\nA:", few_shot.trim_end())
}

pub fn search_entity(few_shot: &str, question: &str) -> String {
    format!("{}\nQuestion: {question}\nSearch entity:", few_shot.trim_end())
}
