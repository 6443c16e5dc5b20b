//! Deterministic generator for DailyDialog-format sample data.
//!
//! Produces everyday-topic dialogues (one per line, `__eou__`-terminated
//! utterances, DailyDialog emotion labels), an evaluation set of candidate
//! responses with simulated multi-annotator judgments, topic-clustered word
//! vectors, and response pools for ranking. Used for the bundled sample
//! under `data/` and for tests that need a corpus of realistic shape.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{tokenize, Dialogue, Utterance};
use crate::perturb::{vup_negative, Rule};
use crate::stats::AnnotationRecord;

struct Topic {
    slots: &'static [(&'static str, &'static [&'static str])],
    exchanges: &'static [(&'static str, &'static str)],
}

const TOPICS: &[Topic] = &[
    // restaurant
    Topic {
        slots: &[
            (
                "dish",
                &[
                    "steak",
                    "salad",
                    "soup",
                    "pasta",
                    "fish",
                    "chicken",
                    "pizza",
                    "noodles",
                    "dumplings",
                    "curry",
                ],
            ),
            (
                "drink",
                &[
                    "coffee", "tea", "juice", "wine", "beer", "water", "lemonade",
                ],
            ),
            ("n", &["two", "three", "four", "five", "six"]),
            ("time", &["seven", "eight", "half past six", "noon"]),
        ],
        exchanges: &[
            (
                "may i take your order now , sir ?",
                "yes , i 'd like the {dish} and a glass of {drink} .",
            ),
            (
                "what would you recommend today ?",
                "our {dish} is very popular , and the chef made it fresh this morning .",
            ),
            (
                "would you like something to drink with your {dish} ?",
                "just some {drink} , please .",
            ),
            (
                "do you have a table for {n} ?",
                "yes , we have a table by the window for {n} people .",
            ),
            (
                "how would you like your {dish} cooked ?",
                "medium , please , with a little extra sauce .",
            ),
            (
                "i 'd like to book a table for tonight .",
                "certainly . for how many people and at what time ?",
            ),
            (
                "could we have the bill , please ?",
                "of course . the {dish} and the {drink} come to forty dollars .",
            ),
            (
                "is the {dish} spicy ?",
                "a little , but the cook can make it mild for you .",
            ),
            (
                "shall we have dinner at {time} ?",
                "{time} is fine . i know a nice restaurant near the river .",
            ),
            (
                "the {dish} here is delicious , isn't it ?",
                "yes , it is the best {dish} i have had in a long time .",
            ),
        ],
    },
    // shopping
    Topic {
        slots: &[
            (
                "item",
                &[
                    "sweater", "jacket", "dress", "shirt", "skirt", "coat", "scarf", "shoes",
                    "jeans", "hat",
                ],
            ),
            (
                "color",
                &["blue", "red", "black", "white", "green", "grey", "brown"],
            ),
            ("size", &["small", "medium", "large"]),
            ("price", &["twenty", "thirty", "fifty", "eighty", "ninety"]),
        ],
        exchanges: &[
            (
                "how much is this {item} ?",
                "it 's {price} dollars , and it is on sale this week .",
            ),
            (
                "do you have this {item} in {color} ?",
                "let me check . yes , we have it in {color} and in {size} .",
            ),
            (
                "can i try on this {item} ?",
                "sure , the fitting room is over there on the left .",
            ),
            (
                "what size do you wear ?",
                "i usually wear a {size} , but it depends on the brand .",
            ),
            (
                "could you give me a discount on the {item} ?",
                "i 'm afraid {price} dollars is already our lowest price .",
            ),
            (
                "does this {item} look good on me ?",
                "the {color} one suits you very well .",
            ),
            (
                "do you accept credit cards ?",
                "yes , we accept all major credit cards and cash .",
            ),
            (
                "i 'd like to return this {item} .",
                "do you have the receipt ? we can give you a refund .",
            ),
            (
                "where can i find the {item} ?",
                "the {item} section is on the second floor , next to the escalator .",
            ),
            (
                "is the {item} made of cotton ?",
                "yes , it 's pure cotton , so you can wash it easily .",
            ),
        ],
    },
    // travel and airport
    Topic {
        slots: &[
            (
                "city",
                &[
                    "london", "paris", "tokyo", "beijing", "new york", "sydney", "rome", "boston",
                ],
            ),
            (
                "day",
                &["monday", "tuesday", "friday", "saturday", "sunday"],
            ),
            ("gate", &["twelve", "fifteen", "twenty", "eight", "thirty"]),
            ("bag", &["suitcase", "backpack", "luggage", "bag"]),
        ],
        exchanges: &[
            (
                "when does the flight to {city} leave ?",
                "it leaves at nine , but please be at gate {gate} an hour early .",
            ),
            (
                "may i see your passport and ticket , please ?",
                "here you are . i 'm flying to {city} .",
            ),
            (
                "how many pieces of luggage do you have ?",
                "just one {bag} and a small carry-on .",
            ),
            (
                "is the flight on time ?",
                "i 'm afraid the flight to {city} is delayed by two hours .",
            ),
            (
                "would you like a window seat or an aisle seat ?",
                "a window seat , please . i love to watch the clouds .",
            ),
            (
                "i 'd like to book a ticket to {city} .",
                "one way or round trip ? we have flights every {day} .",
            ),
            (
                "where is gate {gate} ?",
                "go straight through security and gate {gate} is on your right .",
            ),
            (
                "have you ever been to {city} ?",
                "yes , i went to {city} last year and visited the museums .",
            ),
            (
                "how long is the flight to {city} ?",
                "about eleven hours , so bring a good book .",
            ),
            (
                "can i take this {bag} on board ?",
                "yes , as long as it fits in the overhead bin .",
            ),
        ],
    },
    // hotel
    Topic {
        slots: &[
            (
                "room",
                &["single room", "double room", "suite", "twin room"],
            ),
            (
                "nights",
                &["two nights", "three nights", "one week", "four nights"],
            ),
            ("floor", &["third", "fifth", "tenth", "second"]),
        ],
        exchanges: &[
            (
                "i 'd like to check in , please . i have a reservation .",
                "may i have your name ? yes , a {room} for {nights} .",
            ),
            (
                "do you have any rooms available tonight ?",
                "we have a {room} on the {floor} floor .",
            ),
            (
                "what time is breakfast served ?",
                "breakfast is served from seven to ten in the lobby restaurant .",
            ),
            (
                "could i have a wake-up call at six ?",
                "certainly . we will call your room at six tomorrow morning .",
            ),
            (
                "how much is the {room} per night ?",
                "the {room} is one hundred and twenty dollars including breakfast .",
            ),
            (
                "the air conditioner in my room doesn't work .",
                "i 'm sorry . i 'll send someone from maintenance right away .",
            ),
            (
                "when is check-out time ?",
                "check-out is at noon , but you can leave your luggage at the front desk .",
            ),
            (
                "is there free internet in the rooms ?",
                "yes , the password is on the card next to the key .",
            ),
            (
                "can you recommend a good place to visit nearby ?",
                "the old town is only ten minutes away by taxi .",
            ),
            (
                "i 'd like to extend my stay for {nights} .",
                "no problem , the {room} is available until the weekend .",
            ),
        ],
    },
    // weather
    Topic {
        slots: &[
            (
                "weather",
                &["rainy", "sunny", "windy", "cloudy", "snowy", "foggy"],
            ),
            ("season", &["spring", "summer", "autumn", "winter"]),
            ("deg", &["twenty", "thirty", "ten", "five"]),
        ],
        exchanges: &[
            (
                "what 's the weather like today ?",
                "it 's {weather} and about {deg} degrees .",
            ),
            (
                "do you think it will rain tomorrow ?",
                "the forecast says it will be {weather} , so take an umbrella .",
            ),
            (
                "what 's your favorite season ?",
                "i like {season} best because the weather is so pleasant .",
            ),
            (
                "it 's so {weather} today , isn't it ?",
                "yes , i hope it clears up by the weekend .",
            ),
            (
                "how is the weather in your hometown in {season} ?",
                "it 's usually {weather} and the temperature drops to {deg} degrees .",
            ),
            (
                "should i wear a coat today ?",
                "yes , it 's quite cold and {weather} outside .",
            ),
            (
                "did you hear the weather report ?",
                "they said a storm is coming from the north tonight .",
            ),
            (
                "is it always this {weather} here in {season} ?",
                "not always , but we get a lot of {weather} days .",
            ),
        ],
    },
    // work and jobs
    Topic {
        slots: &[
            (
                "job",
                &[
                    "engineer",
                    "accountant",
                    "secretary",
                    "manager",
                    "salesman",
                    "designer",
                    "teacher",
                ],
            ),
            (
                "company",
                &[
                    "a bank",
                    "an advertising firm",
                    "a software company",
                    "a trading company",
                    "a hospital",
                ],
            ),
            (
                "years",
                &["two years", "three years", "five years", "ten years"],
            ),
        ],
        exchanges: &[
            (
                "what do you do for a living ?",
                "i 'm an {job} at {company} .",
            ),
            (
                "why do you want to work for our company ?",
                "i have worked as a {job} for {years} and i want new challenges .",
            ),
            (
                "how long have you worked there ?",
                "for about {years} . i really enjoy my colleagues .",
            ),
            (
                "what are your strengths ?",
                "i 'm organized , and i work well with a team under pressure .",
            ),
            (
                "when can you start working ?",
                "i can start next monday if you like .",
            ),
            (
                "did you finish the report for the meeting ?",
                "almost . i 'll send it to the manager before lunch .",
            ),
            (
                "what salary do you expect ?",
                "i expect around four thousand a month , but it is negotiable .",
            ),
            (
                "do you often work overtime ?",
                "yes , we have a big project with {company} this month .",
            ),
            (
                "have you applied for the {job} position ?",
                "yes , i sent my resume last week and i have an interview on friday .",
            ),
            (
                "how was your first day at work ?",
                "busy , but everyone at {company} was friendly .",
            ),
        ],
    },
    // health
    Topic {
        slots: &[
            (
                "symptom",
                &[
                    "headache",
                    "fever",
                    "sore throat",
                    "cough",
                    "stomachache",
                    "backache",
                ],
            ),
            (
                "days",
                &["two days", "three days", "a week", "since yesterday"],
            ),
            (
                "medicine",
                &["aspirin", "cough syrup", "antibiotics", "these pills"],
            ),
        ],
        exchanges: &[
            (
                "what seems to be the problem ?",
                "i have a terrible {symptom} and i feel very tired .",
            ),
            (
                "how long have you had this {symptom} ?",
                "for {days} . it gets worse at night .",
            ),
            (
                "do you have a fever ?",
                "i think so . my temperature was high this morning .",
            ),
            (
                "how often should i take the {medicine} ?",
                "take {medicine} three times a day after meals .",
            ),
            (
                "are you allergic to any medicine ?",
                "no , i 'm not allergic to anything as far as i know .",
            ),
            (
                "you look pale . are you feeling well ?",
                "not really . i 've had a {symptom} for {days} .",
            ),
            (
                "should i stay in bed ?",
                "yes , get plenty of rest and drink a lot of water .",
            ),
            (
                "i 'd like to make an appointment with the doctor .",
                "the doctor is free on thursday morning at ten .",
            ),
            (
                "do i need an x-ray ?",
                "let me examine you first , then we 'll decide .",
            ),
        ],
    },
    // school and study
    Topic {
        slots: &[
            (
                "subject",
                &[
                    "math",
                    "history",
                    "chemistry",
                    "english",
                    "physics",
                    "economics",
                    "biology",
                ],
            ),
            ("exam", &["final exam", "midterm", "quiz", "test"]),
            ("grade", &["an a", "a b", "full marks", "a good grade"]),
        ],
        exchanges: &[
            (
                "how did you do on the {subject} {exam} ?",
                "i got {grade} , because i studied every night .",
            ),
            (
                "what is your major ?",
                "i major in {subject} , and i minor in music .",
            ),
            (
                "can you help me with my {subject} homework ?",
                "sure , let 's meet in the library after class .",
            ),
            (
                "when is the {exam} ?",
                "the {subject} {exam} is next tuesday morning .",
            ),
            (
                "do you like your {subject} teacher ?",
                "yes , she explains everything so clearly .",
            ),
            (
                "are you going to the lecture this afternoon ?",
                "yes , professor smith is talking about {subject} .",
            ),
            (
                "have you finished the essay ?",
                "not yet , i still need to find more references in the library .",
            ),
            (
                "how many courses are you taking this term ?",
                "five , including {subject} and a language course .",
            ),
            ("did you pass the {exam} ?", "yes , i passed with {grade} ."),
        ],
    },
    // movies and entertainment
    Topic {
        slots: &[
            (
                "genre",
                &[
                    "comedy",
                    "horror movie",
                    "action movie",
                    "romance",
                    "documentary",
                    "cartoon",
                ],
            ),
            ("actor", &["tom", "julia", "jackie", "emma", "brad"]),
            (
                "when",
                &["tonight", "tomorrow night", "this weekend", "on saturday"],
            ),
        ],
        exchanges: &[
            (
                "would you like to go to the movies {when} ?",
                "i 'd love to . what 's playing at the cinema ?",
            ),
            (
                "what kind of movies do you like ?",
                "i like {genre} best , especially ones with {actor} .",
            ),
            (
                "have you seen the new {genre} ?",
                "yes , i saw it last week . {actor} was wonderful in it .",
            ),
            (
                "shall i buy the tickets online ?",
                "good idea . the seats in the middle are the best .",
            ),
            (
                "what time does the film start ?",
                "at seven thirty , so let 's meet at the cinema at seven .",
            ),
            (
                "how was the concert last night ?",
                "fantastic . the band played all my favorite songs .",
            ),
            (
                "do you want some popcorn ?",
                "yes , a large popcorn and a coke , please .",
            ),
            (
                "who is your favorite actor ?",
                "{actor} , because the roles are always interesting .",
            ),
            (
                "is there a good {genre} on tv {when} ?",
                "there 's one at nine on channel five .",
            ),
        ],
    },
    // directions and transport
    Topic {
        slots: &[
            (
                "place",
                &[
                    "post office",
                    "train station",
                    "museum",
                    "city hall",
                    "bus stop",
                    "library",
                    "supermarket",
                ],
            ),
            (
                "street",
                &["main street", "park avenue", "king road", "fifth avenue"],
            ),
            (
                "bus",
                &[
                    "number five",
                    "number twelve",
                    "number thirty",
                    "the express",
                ],
            ),
        ],
        exchanges: &[
            (
                "excuse me , how can i get to the {place} ?",
                "go straight along {street} and turn left at the second light .",
            ),
            (
                "is the {place} far from here ?",
                "no , it 's about ten minutes on foot .",
            ),
            (
                "which bus goes to the {place} ?",
                "take bus {bus} and get off at {street} .",
            ),
            (
                "could you show me on the map where we are ?",
                "we 're here , on {street} , near the {place} .",
            ),
            (
                "how much is the taxi fare to the {place} ?",
                "about fifteen dollars , depending on the traffic .",
            ),
            (
                "where can i buy a subway ticket ?",
                "there 's a ticket machine at the entrance of the station .",
            ),
            (
                "does this train stop at the {place} ?",
                "no , you need to change at the next station .",
            ),
            (
                "how often does bus {bus} come ?",
                "every fifteen minutes during rush hour .",
            ),
            (
                "am i on the right road to the {place} ?",
                "yes , just keep going and you will see it on {street} .",
            ),
        ],
    },
    // bank and money
    Topic {
        slots: &[
            (
                "account",
                &[
                    "savings account",
                    "checking account",
                    "credit card",
                    "student account",
                ],
            ),
            (
                "amount",
                &[
                    "five hundred dollars",
                    "one thousand dollars",
                    "two hundred pounds",
                    "three thousand yuan",
                ],
            ),
        ],
        exchanges: &[
            (
                "i 'd like to open a {account} .",
                "certainly . may i see your passport and fill in this form ?",
            ),
            (
                "what is the interest rate on the {account} ?",
                "it 's two percent a year for a {account} .",
            ),
            (
                "i want to withdraw {amount} .",
                "please enter your password and sign here .",
            ),
            (
                "can i exchange {amount} into euros ?",
                "yes , the exchange rate today is on the board over there .",
            ),
            (
                "how do i transfer money to another account ?",
                "you can do it online or at the counter with this form .",
            ),
            (
                "i lost my {account} card .",
                "i 'll cancel it now and we 'll send you a new card in a week .",
            ),
            (
                "is there a fee for this service ?",
                "there is a small fee of five dollars for each transfer .",
            ),
            (
                "could you break this bill into smaller notes ?",
                "sure , how would you like it ?",
            ),
        ],
    },
    // renting an apartment
    Topic {
        slots: &[
            ("home", &["apartment", "flat", "house", "studio"]),
            ("rooms", &["two bedrooms", "one bedroom", "three bedrooms"]),
            (
                "rent",
                &[
                    "eight hundred",
                    "one thousand",
                    "twelve hundred",
                    "six hundred",
                ],
            ),
        ],
        exchanges: &[
            (
                "i 'm looking for an {home} to rent .",
                "how many rooms do you need ? we have a nice one with {rooms} .",
            ),
            (
                "how much is the rent for this {home} ?",
                "the rent is {rent} dollars a month , with water included .",
            ),
            (
                "is the {home} furnished ?",
                "yes , it comes with a sofa , a bed and a washing machine .",
            ),
            (
                "when can i move in ?",
                "the {home} is available from the first of next month .",
            ),
            (
                "are pets allowed in the {home} ?",
                "i 'm afraid the landlord doesn't allow dogs or cats .",
            ),
            (
                "is the {home} close to the subway ?",
                "it 's only five minutes from the station .",
            ),
            (
                "do i have to pay a deposit ?",
                "yes , one month 's rent as a deposit , which we return when you leave .",
            ),
            (
                "the kitchen sink is leaking again .",
                "i 'll call the plumber and ask him to come this afternoon .",
            ),
        ],
    },
    // sports
    Topic {
        slots: &[
            (
                "sport",
                &[
                    "tennis",
                    "basketball",
                    "football",
                    "swimming",
                    "badminton",
                    "golf",
                    "table tennis",
                ],
            ),
            (
                "team",
                &[
                    "the lakers",
                    "our school team",
                    "manchester united",
                    "the home team",
                ],
            ),
            (
                "often",
                &["twice a week", "every morning", "on weekends", "every day"],
            ),
        ],
        exchanges: &[
            (
                "do you like playing {sport} ?",
                "yes , i play {sport} {often} with my friends .",
            ),
            (
                "did you watch the game last night ?",
                "yes , {team} won by ten points .",
            ),
            (
                "what sports are you good at ?",
                "i 'm pretty good at {sport} , but i can't swim at all .",
            ),
            (
                "how often do you go to the gym ?",
                "{often} , usually before work .",
            ),
            (
                "would you like to play {sport} with me this afternoon ?",
                "sure , let 's meet at the court at four .",
            ),
            (
                "which team do you support ?",
                "i 've supported {team} since i was a kid .",
            ),
            (
                "how do you keep in shape ?",
                "i go jogging {often} and play {sport} on sundays .",
            ),
            (
                "who won the {sport} match ?",
                "{team} , after a very close game .",
            ),
        ],
    },
    // family and friends
    Topic {
        slots: &[
            (
                "relative",
                &[
                    "sister",
                    "brother",
                    "mother",
                    "father",
                    "cousin",
                    "grandmother",
                    "uncle",
                ],
            ),
            ("age", &["twenty", "eight", "fifteen", "sixty", "thirty"]),
            (
                "event",
                &["birthday party", "wedding", "family reunion", "graduation"],
            ),
        ],
        exchanges: &[
            (
                "how many people are there in your family ?",
                "there are four of us : my parents , my {relative} and me .",
            ),
            (
                "how old is your {relative} ?",
                "my {relative} is {age} years old this year .",
            ),
            (
                "are you going to the {event} on saturday ?",
                "of course . my {relative} is coming too .",
            ),
            (
                "what does your {relative} do ?",
                "my {relative} works as a nurse in the city hospital .",
            ),
            (
                "do you often visit your {relative} ?",
                "i visit my {relative} every other weekend .",
            ),
            (
                "what should i buy for my {relative} 's {event} ?",
                "how about flowers or a nice photo album ?",
            ),
            (
                "who do you look like , your mother or your father ?",
                "people say i look like my father .",
            ),
            (
                "did you enjoy the {event} ?",
                "very much . the whole family was there .",
            ),
        ],
    },
];

const GREETINGS: &[(&str, &str)] = &[
    ("good morning .", "good morning . what can i do for you ?"),
    ("hi , how are you doing ?", "i 'm fine , thanks . and you ?"),
    ("hello , nice to see you again .", "nice to see you too ."),
    ("excuse me , do you have a minute ?", "sure , what is it ?"),
    ("hey , long time no see !", "yes , how have you been ?"),
];

const CLOSINGS: &[(&str, &str)] = &[
    ("thank you very much .", "you 're welcome ."),
    ("thanks for your help .", "my pleasure ."),
    ("ok , see you later .", "see you ."),
    ("that sounds great .", "good , it 's settled then ."),
    ("i see . thank you .", "not at all ."),
];

/// Reactions that carry a DailyDialog emotion label.
const REACTIONS: &[(&str, u8)] = &[
    ("that 's wonderful ! i 'm so happy for you !", 4),
    ("great ! i 'm really glad to hear that .", 4),
    ("how nice ! that makes me happy .", 4),
    ("i 'm so sorry to hear that .", 5),
    ("oh no , that 's too bad . i feel terrible about it .", 5),
    ("really ? i can't believe it !", 6),
    ("what ? are you serious ?", 6),
    ("that 's ridiculous ! i 'm so angry about it .", 1),
    ("how annoying ! i hate it when that happens .", 1),
    ("ugh , that 's disgusting .", 2),
    ("i 'm scared . what if something goes wrong ?", 3),
];

/// Bland replies used as unspecific candidates.
const GENERIC: &[&str] = &[
    "i see .",
    "okay .",
    "i don't know .",
    "yes .",
    "sure .",
    "thank you .",
    "me too .",
];

fn fill(template: &str, bindings: &BTreeMap<&str, &str>) -> String {
    let mut out = template.to_string();
    for (k, v) in bindings {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}

struct Generated {
    dialogue: Dialogue,
    topic: usize,
}

fn generate_dialogue<R: Rng>(rng: &mut R) -> Generated {
    let topic_id = rng.random_range(0..TOPICS.len());
    let topic = &TOPICS[topic_id];
    let bindings: BTreeMap<&str, &str> = topic
        .slots
        .iter()
        .map(|(k, vs)| (*k, *vs.choose(rng).expect("slot values")))
        .collect();
    let mut turns: Vec<(String, u8)> = Vec::new();
    if rng.random_bool(0.5) {
        let (a, b) = GREETINGS.choose(rng).expect("greetings");
        turns.push((a.to_string(), 0));
        turns.push((b.to_string(), 0));
    }
    let n_exchanges = rng.random_range(1..=4);
    let mut picks: Vec<usize> = (0..topic.exchanges.len()).collect();
    picks.shuffle(rng);
    for &i in picks.iter().take(n_exchanges) {
        let (q, a) = topic.exchanges[i];
        turns.push((fill(q, &bindings), 0));
        turns.push((fill(a, &bindings), 0));
        if rng.random_bool(0.3) {
            let (r, e) = REACTIONS.choose(rng).expect("reactions");
            turns.push((r.to_string(), *e));
        }
    }
    if rng.random_bool(0.6) {
        let (a, b) = CLOSINGS.choose(rng).expect("closings");
        turns.push((a.to_string(), 0));
        turns.push((b.to_string(), 0));
    }
    let (utterances, emotions): (Vec<Utterance>, Vec<u8>) = turns
        .into_iter()
        .map(|(t, e)| (Utterance::new(capitalize(&t)), e))
        .unzip();
    Generated {
        dialogue: Dialogue {
            utterances,
            emotions: Some(emotions),
        },
        topic: topic_id,
    }
}

/// `n` dialogues with emotion labels, deterministic in `seed`.
pub fn dialogues(n: usize, seed: u64) -> Vec<Dialogue> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| generate_dialogue(&mut rng).dialogue)
        .collect()
}

/// Corpus and emotion file contents for a list of dialogues.
pub fn render(dialogues: &[Dialogue]) -> (String, String) {
    let mut text = String::new();
    let mut emo = String::new();
    for d in dialogues {
        text.push_str(&d.to_line());
        text.push('\n');
        emo.push_str(&d.emotion_line().unwrap_or_default());
        emo.push('\n');
    }
    (text, emo)
}

/// One candidate response in the evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalItem {
    pub item_id: String,
    pub context: String,
    pub response: String,
    pub reference: String,
    /// Latent `(u, s, l)` the simulated annotators perturb.
    pub truth: (u8, u8, u8),
}

fn is_specific(tokens: &[String]) -> bool {
    tokens.len() >= 6
}

/// Evaluation items: `contexts` contexts with five candidates each, and
/// simulated judgments from `annotators` annotators.
///
/// Candidates per context are the true reply, a reply from another
/// dialogue, a bland reply, and two corrupted versions of the true reply.
pub fn eval_set(
    contexts: usize,
    annotators: usize,
    seed: u64,
) -> (Vec<EvalItem>, Vec<AnnotationRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Generated> = (0..contexts * 2 + 10)
        .map(|_| generate_dialogue(&mut rng))
        .collect();
    let mut items = Vec::new();
    for c in 0..contexts {
        let g = &pool[c];
        let utts = &g.dialogue.utterances;
        let turn = if utts.len() > 2 {
            rng.random_range(0..utts.len() - 1)
        } else {
            0
        };
        let (context, reference) = (&utts[turn], &utts[turn + 1]);
        let other = loop {
            let o = &pool[rng.random_range(contexts..pool.len())];
            if o.topic != g.topic {
                break o;
            }
        };
        let random_reply = other
            .dialogue
            .utterances
            .choose(&mut rng)
            .expect("non-empty");
        let generic = GENERIC.choose(&mut rng).expect("generic");
        let mut corrupt = || -> String {
            let toks = &reference.tokens;
            if toks.len() < 2 {
                return "the the the".into();
            }
            loop {
                let (out, rule) = vup_negative(toks, &mut rng).expect("len >= 2");
                if rule != Rule::Drop && out != *toks {
                    return out.join(" ");
                }
            }
        };
        let corrupted_a = corrupt();
        let corrupted_b = corrupt();
        let spec = |raw: &str| u8::from(is_specific(&tokenize(raw)));
        let candidates = [
            (reference.raw.clone(), (1, 1, spec(&reference.raw))),
            (random_reply.raw.clone(), (1, 0, spec(&random_reply.raw))),
            (capitalize(generic), (1, 1, 0)),
            (corrupted_a.clone(), (0, 0, spec(&corrupted_a))),
            (corrupted_b.clone(), (0, 0, spec(&corrupted_b))),
        ];
        for (k, (response, truth)) in candidates.into_iter().enumerate() {
            items.push(EvalItem {
                item_id: format!("c{c:03}-r{k}"),
                context: context.raw.clone(),
                response,
                reference: reference.raw.clone(),
                truth,
            });
        }
    }
    let noise = Normal::new(0.0, 0.45).expect("valid sigma");
    let mut records = Vec::new();
    for a in 0..annotators {
        let bias: f64 = [0.0, 0.25, -0.2, 0.1][a % 4];
        for it in &items {
            let flip = |x: u8, rng: &mut ChaCha8Rng| if rng.random_bool(0.08) { 1 - x } else { x };
            let (u, s, l) = it.truth;
            let (u, s, l) = (flip(u, &mut rng), flip(s, &mut rng), flip(l, &mut rng));
            let base = match (u, s, l) {
                (0, _, _) => 0.2,
                (1, 0, _) => 0.7,
                (1, 1, 0) => 2.0,
                _ => 2.8,
            };
            let overall = (base + bias + noise.sample(&mut rng))
                .round()
                .clamp(0.0, 3.0) as u8;
            records.push(
                AnnotationRecord::new(&it.item_id, &format!("a{}", a + 1), u, s, l, overall)
                    .expect("ranges respected"),
            );
        }
    }
    (items, records)
}

/// `item_id<TAB>context<TAB>response<TAB>reference` lines.
pub fn render_pairs(items: &[EvalItem]) -> String {
    items
        .iter()
        .map(|i| {
            format!(
                "{}\t{}\t{}\t{}\n",
                i.item_id, i.context, i.response, i.reference
            )
        })
        .collect()
}

/// Word vectors in which tokens of the same topic share a random direction.
pub fn word_vectors(dim: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut owner: BTreeMap<String, usize> = BTreeMap::new();
    let mut add = |text: &str, group: usize| {
        for t in tokenize(text) {
            owner.entry(t).or_insert(group);
        }
    };
    for (i, topic) in TOPICS.iter().enumerate() {
        for (_, values) in topic.slots {
            values.iter().for_each(|v| add(v, i));
        }
        for (q, a) in topic.exchanges {
            add(q, i);
            add(a, i);
        }
    }
    let shared = TOPICS.len();
    for (a, b) in GREETINGS.iter().chain(CLOSINGS) {
        add(a, shared);
        add(b, shared);
    }
    for (r, _) in REACTIONS {
        add(r, shared);
    }
    GENERIC.iter().for_each(|g| add(g, shared));
    let centroids: Vec<Vec<f64>> = (0..=shared)
        .map(|_| (0..dim).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    let mut out = String::new();
    for (token, group) in owner {
        let v: Vec<String> = centroids[group]
            .iter()
            .map(|c| format!("{:.4}", c + 0.8 * normal.sample(&mut rng)))
            .collect();
        out.push_str(&format!("{token} {}\n", v.join(" ")));
    }
    out
}

/// Response pools for ranking: `pool_id<TAB>context<TAB>response` lines.
///
/// Each pool holds one true reply among same-topic and off-topic replies
/// and corruptions.
pub fn response_pools(pools: usize, size: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens: Vec<Generated> = (0..pools + size * 4)
        .map(|_| generate_dialogue(&mut rng))
        .collect();
    let mut out = String::new();
    for p in 0..pools {
        let utts = &gens[p].dialogue.utterances;
        let turn = rng.random_range(0..utts.len() - 1);
        let mut responses: BTreeSet<String> = BTreeSet::new();
        let mut list = vec![utts[turn + 1].raw.clone()];
        responses.insert(utts[turn + 1].raw.clone());
        while list.len() < size {
            let g = gens[pools..].choose(&mut rng).expect("non-empty");
            let u = g.dialogue.utterances.choose(&mut rng).expect("non-empty");
            let cand = if rng.random_bool(0.25) && u.len() >= 2 {
                vup_negative(&u.tokens, &mut rng)
                    .expect("len >= 2")
                    .0
                    .join(" ")
            } else {
                u.raw.clone()
            };
            if responses.insert(cand.clone()) {
                list.push(cand);
            }
        }
        list.shuffle(&mut rng);
        for r in list {
            out.push_str(&format!("p{p:03}\t{}\t{r}\n", utts[turn].raw));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_dailydialog;

    #[test]
    fn generated_corpus_parses_back() {
        let d = dialogues(50, 7);
        let (text, emo) = render(&d);
        let back = parse_dailydialog(&text, Some(&emo)).unwrap();
        assert_eq!(back.len(), 50);
        for (a, b) in d.iter().zip(&back) {
            assert_eq!(a.utterances.len(), b.utterances.len());
            for (x, y) in a.utterances.iter().zip(&b.utterances) {
                assert_eq!(x.tokens, y.tokens);
            }
            assert_eq!(a.emotions, b.emotions);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(render(&dialogues(20, 3)), render(&dialogues(20, 3)));
        assert_ne!(render(&dialogues(20, 3)), render(&dialogues(20, 4)));
        assert_eq!(eval_set(5, 3, 1), eval_set(5, 3, 1));
    }

    #[test]
    fn eval_set_shape() {
        let (items, records) = eval_set(10, 4, 11);
        assert_eq!(items.len(), 50);
        assert_eq!(records.len(), 200);
        assert!(items.iter().all(|i| !i.response.trim().is_empty()));
    }

    #[test]
    fn vectors_parse() {
        let table = crate::baselines::WordVectorTable::parse(&word_vectors(16, 1)).unwrap();
        assert_eq!(table.dim(), 16);
        assert!(table.get("steak").is_some());
    }

    #[test]
    fn pools_have_requested_size() {
        let text = response_pools(3, 10, 5);
        assert_eq!(text.lines().count(), 30);
    }
}
