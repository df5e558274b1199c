//! Expands query words with misspellings and stemming variants found in a
//! vocabulary.
//!
//! cargo run --example query_expansion -- [word ...]

use mailrank::queryexp::{porter, tokenize, Expander, Vocabulary};

fn main() {
    let vocab = Vocabulary::new([
        "meeting", "meetings", "meetng", "meet", "metting", "budget", "budgets", "budgeted", "budgetting", "budge",
        "attachment", "attachments", "attachement", "attached", "gas", "gasoline", "account", "accounts", "acount",
    ]);
    let args: Vec<String> = std::env::args().skip(1).collect();
    let raw = if args.is_empty() { "meeting budget attachment gas".to_string() } else { args.join(" ") };
    let query = match tokenize(&raw) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };

    let expanded = Expander::default().expand_query(&query, &vocab);
    let literal = Expander::disabled().expand_query(&query, &vocab);
    for word in expanded.words() {
        let all = expanded.variants_of(word).cloned().unwrap_or_default();
        let stems = vocab.stem_family(word);
        let edits: Vec<&str> = all.iter().filter(|v| !stems.contains(*v)).map(String::as_str).collect();
        println!("{word} (stem {})", porter::stem(word));
        println!("  stemming:     {}", stems.iter().map(String::as_str).collect::<Vec<_>>().join(", "));
        println!("  edit variant: {}", edits.join(", "));
        println!("  literal only: {:?}", literal.variants_of(word).cloned().unwrap_or_default());
    }
}
