//! Published network parameters as printed, kept apart from the bundled
//! JSON so the transcription can be checked against them.

pub const HIDDEN_BIASES: [f64; 15] = [
    -0.0788662358905827,
    -0.199252461268044,
    0.476703785811994,
    0.0788437136945187,
    0.0788437137489292,
    -0.0843897428619086,
    0.0788437137616096,
    -0.0788437136323596,
    0.0788437137854139,
    -0.0511645156192877,
    0.0521386721602554,
    0.0788437137594562,
    0.0788437137550028,
    0.325165283314198,
    0.199252475098178,
];

pub const HIDDEN_WEIGHTS: [[f64; 2]; 15] = [
    [0.330659943126136, 0.375354867765757],
    [-0.243061055602675, -0.302898742825237],
    [-0.413686729890811, 0.124969405112560],
    [0.0503908825102565, -0.242889973645394],
    [0.0503908825336595, -0.242889973660344],
    [0.286942170255656, -0.871006037765083],
    [0.0503908825390176, -0.242889973663920],
    [-0.0503908824834618, 0.242889973628136],
    [0.0503908825490957, -0.242889973670382],
    [-0.194105547886448, -0.882406133751217],
    [-0.685142210229390, 0.629560967118233],
    [0.0503908825379756, -0.242889973663218],
    [0.0503908825362639, -0.242889973662112],
    [0.796782784260382, -0.181097405343480],
    [0.243060836205972, 0.302898505989682],
];

pub const OUTPUT_WEIGHTS: [f64; 15] = [
    0.526055556926590,
    -0.526712907336645,
    0.560221719680131,
    -0.357268781908311,
    -0.357268781972241,
    -0.335049187325717,
    -0.357268781987367,
    0.357268781834757,
    -0.357268782015078,
    0.371791504344763,
    -0.318328545469931,
    -0.357268781984634,
    -0.357268781979911,
    -0.244907095063019,
    0.526712952341475,
];

pub const OUTPUT_BIAS: f64 = 0.1528;
