"""Built-in pool of common first names used as agent identities."""

NAME_POOL = (
    "Aaron", "Abigail", "Adam", "Alan", "Albert", "Alexander", "Alice", "Amanda", "Amber",
    "Amy", "Andrea", "Andrew", "Angela", "Anna", "Anthony", "Ashley", "Austin", "Barbara",
    "Benjamin", "Betty", "Beverly", "Bobby", "Brandon", "Brenda", "Brian", "Brittany",
    "Bruce", "Carl", "Carol", "Catherine", "Charles", "Cheryl", "Christian", "Christina",
    "Christopher", "Cynthia", "Daniel", "Danielle", "David", "Deborah", "Debra", "Denise",
    "Dennis", "Diana", "Diane", "Donald", "Donna", "Doris", "Dorothy", "Douglas", "Dylan",
    "Edward", "Elizabeth", "Emily", "Emma", "Eric", "Ethan", "Eugene", "Evelyn", "Frances",
    "Frank", "Gabriel", "Gary", "George", "Gerald", "Gloria", "Grace", "Gregory", "Hannah",
    "Harold", "Heather", "Helen", "Henry", "Isabella", "Jack", "Jacob", "Jacqueline",
    "James", "Janet", "Janice", "Jason", "Jean", "Jeffrey", "Jennifer", "Jeremy", "Jerry",
    "Jesse", "Jessica", "Joan", "Joe", "John", "Jonathan", "Jordan", "Jose", "Joseph",
    "Joshua", "Joyce", "Juan", "Judith", "Judy", "Julia", "Julie", "Justin", "Karen",
    "Katherine", "Kathleen", "Kayla", "Keith", "Kelly", "Kenneth", "Kevin", "Kimberly",
    "Kyle", "Larry", "Laura", "Lauren", "Lawrence", "Linda", "Lisa", "Logan", "Louis",
    "Madison", "Margaret", "Maria", "Marie", "Marilyn", "Mark", "Martha", "Mary",
    "Matthew", "Megan", "Melissa", "Michael", "Michelle", "Nancy", "Natalie", "Nathan",
    "Nicholas", "Nicole", "Noah", "Olivia", "Pamela", "Patricia", "Patrick", "Paul",
    "Peter", "Philip", "Rachel", "Ralph", "Randy", "Raymond", "Rebecca", "Richard",
    "Robert", "Roger", "Ronald", "Rose", "Roy", "Russell", "Ruth", "Ryan", "Samantha",
    "Samuel", "Sandra", "Sara", "Sarah", "Scott", "Sean", "Sharon", "Shirley", "Sophia",
    "Stephanie", "Stephen", "Steven", "Susan", "Teresa", "Terry", "Theresa", "Thomas",
    "Timothy", "Tyler", "Victoria", "Vincent", "Virginia", "Walter", "Wayne", "William",
    "Zachary",
)
