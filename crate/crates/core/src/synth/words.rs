//! Background vocabularies. Words are lowercase and contain no place names.

pub const EN: &[&str] = &[
    "the", "a", "and", "of", "to", "in", "is", "it", "you", "that", "was", "for", "on", "are", "with",
    "as", "this", "be", "at", "have", "from", "or", "one", "had", "by", "but", "not", "what", "all",
    "were", "we", "when", "your", "can", "said", "there", "use", "each", "which", "she", "do", "how",
    "their", "if", "will", "up", "other", "about", "out", "many", "then", "them", "these", "so",
    "some", "her", "would", "make", "like", "him", "into", "time", "has", "look", "two", "more",
    "write", "go", "see", "number", "no", "way", "could", "people", "my", "than", "first", "been",
    "call", "who", "its", "now", "find", "long", "down", "day", "did", "get", "come", "made", "may",
    "part", "morning", "coffee", "music", "game", "friends", "happy", "weekend", "school", "work",
    "market", "photo", "road", "bus", "train", "city", "village", "family", "dinner", "lunch",
    "news", "video", "love", "sunny", "cloudy", "rain", "river", "water", "bridge", "street",
    "phone", "power", "school", "festival", "temple", "mountain", "trek", "tea", "rice", "cricket",
    "football", "match", "team", "win", "lose", "price", "shop", "new", "old", "big", "small",
    "today", "tonight", "tomorrow", "yesterday", "week", "flood", "storm", "damage", "help",
];

pub const FR: &[&str] = &[
    "le", "la", "les", "un", "une", "et", "de", "des", "du", "en", "est", "que", "qui", "dans",
    "pour", "pas", "sur", "avec", "ce", "il", "elle", "nous", "vous", "ils", "on", "au", "aux",
    "plus", "tout", "mais", "comme", "fait", "bien", "sans", "peu", "très", "aussi", "leur",
    "sont", "avoir", "être", "faire", "dire", "aller", "voir", "savoir", "pouvoir", "vouloir",
    "venir", "prendre", "jour", "matin", "soir", "nuit", "semaine", "café", "musique", "jeu",
    "amis", "heureux", "école", "travail", "marché", "photo", "route", "bus", "train", "ville",
    "village", "famille", "dîner", "déjeuner", "nouvelles", "vidéo", "amour", "soleil", "nuage",
    "pluie", "rivière", "eau", "pont", "rue", "téléphone", "fête", "montagne", "thé", "riz",
    "football", "match", "équipe", "gagner", "perdre", "prix", "magasin", "nouveau", "vieux",
    "grand", "petit", "aujourd'hui", "demain", "hier", "temps", "gens", "encore", "toujours",
    "jamais", "beaucoup", "ici", "là", "maison", "voiture", "livre", "enfant", "femme", "homme",
    "orage", "dégâts", "aide", "inondation", "vent", "froid", "chaud", "ciel", "mer", "lac",
];

pub const ES: &[&str] = &[
    "el", "la", "los", "las", "un", "una", "y", "de", "del", "en", "es", "que", "por", "con",
    "para", "no", "se", "su", "al", "lo", "como", "más", "pero", "sus", "le", "ya", "o", "este",
    "sí", "porque", "esta", "entre", "cuando", "muy", "sin", "sobre", "también", "me", "hasta",
    "hay", "donde", "quien", "desde", "todo", "nos", "durante", "todos", "uno", "les", "ni",
    "contra", "otros", "ese", "eso", "ante", "ellos", "día", "mañana", "noche", "semana", "café",
    "música", "juego", "amigos", "feliz", "escuela", "trabajo", "mercado", "foto", "camino",
    "autobús", "tren", "ciudad", "pueblo", "familia", "cena", "almuerzo", "noticias", "vídeo",
    "amor", "sol", "nube", "lluvia", "río", "agua", "puente", "calle", "teléfono", "fiesta",
    "montaña", "té", "arroz", "fútbol", "partido", "equipo", "ganar", "perder", "precio",
    "tienda", "nuevo", "viejo", "grande", "pequeño", "hoy", "ayer", "tiempo", "gente", "casa",
    "coche", "libro", "niño", "mujer", "hombre", "tormenta", "daños", "ayuda", "inundación",
    "viento", "frío", "calor", "cielo", "mar", "lago", "siempre", "nunca", "mucho", "aquí",
];

pub const IT: &[&str] = &[
    "il", "lo", "la", "i", "gli", "le", "un", "una", "e", "di", "da", "in", "con", "su", "per",
    "tra", "fra", "che", "non", "si", "è", "sono", "ma", "come", "anche", "più", "molto", "tutto",
    "questo", "quello", "io", "tu", "lui", "lei", "noi", "voi", "loro", "essere", "avere", "fare",
    "dire", "andare", "vedere", "sapere", "potere", "volere", "venire", "giorno", "mattina",
    "sera", "notte", "settimana", "caffè", "musica", "gioco", "amici", "felice", "scuola",
    "lavoro", "mercato", "foto", "strada", "autobus", "treno", "città", "paese", "famiglia",
    "cena", "pranzo", "notizie", "video", "amore", "sole", "nuvola", "pioggia", "fiume", "acqua",
    "ponte", "via", "telefono", "festa", "montagna", "tè", "riso", "calcio", "partita", "squadra",
    "vincere", "perdere", "prezzo", "negozio", "nuovo", "vecchio", "grande", "piccolo", "oggi",
    "domani", "ieri", "tempo", "gente", "casa", "macchina", "libro", "bambino", "donna", "uomo",
    "temporale", "danni", "aiuto", "alluvione", "vento", "freddo", "caldo", "cielo", "mare",
    "lago", "sempre", "mai", "qui", "ancora", "ecco", "bene", "grazie", "ciao", "bello", "buono",
];

/// Vocabulary for a language code; unknown codes fall back to English.
pub fn for_language(code: &str) -> &'static [&'static str] {
    match code {
        "fr" => FR,
        "es" => ES,
        "it" => IT,
        _ => EN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::normalize;

    #[test]
    fn words_are_single_normalized_tokens() {
        for list in [EN, FR, ES, IT] {
            for w in list.iter() {
                let toks = crate::text::tokenize(w);
                assert_eq!(toks.len(), 1, "{w}");
                assert_eq!(normalize(w), *w, "{w}");
            }
        }
    }
}
